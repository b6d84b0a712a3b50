/*
 * Copyright 2026 The seneca-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Text form of micro-kernels.
//
//   MLD R0, A1, 1     // load weight, advance A1
//   ADD R1, R0, R1
//   MST A2, R1, 1
//   EVC R2
//
// One instruction per line, `//` to end of line is a comment. The call form
// used in hardware listings, `MLD(R0, ADD1, 1)`, is accepted as well; there
// `ADDn` names address register An.

#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "seneca/errors.hpp"
#include "seneca/isa.hpp"

namespace seneca {

namespace detail {

struct Token {
    std::string text;
    std::size_t column = 0; // 1-based
};

enum class OperandKind { reg, addr, flag };

inline int parse_operand(const Token &tok, OperandKind kind, std::size_t line)
{
    const std::string &t = tok.text;
    const auto digits_from = [&](std::size_t pos, const char *what) {
        if (pos >= t.size()) {
            throw AssemblyError(std::string("missing ") + what + " index in '" + t + "'", line,
                    tok.column);
        }
        long value = 0;
        for (std::size_t i = pos; i < t.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(t[i]))) {
                throw AssemblyError("malformed operand '" + t + "'", line, tok.column);
            }
            value = value * 10 + (t[i] - '0');
            if (value > 1'000'000) break;
        }
        return static_cast<int>(value);
    };

    switch (kind) {
    case OperandKind::reg: {
        if (t.empty() || t[0] != 'R') {
            throw AssemblyError("expected a data register, got '" + t + "'", line, tok.column);
        }
        const int r = digits_from(1, "register");
        if (r >= kRegisterCount) {
            throw AssemblyError("register index R" + std::to_string(r) + " out of range (0-" +
                            std::to_string(kRegisterCount - 1) + ")",
                    line, tok.column);
        }
        return r;
    }
    case OperandKind::addr: {
        int a = 0;
        if (t.rfind("ADD", 0) == 0 && t.size() > 3) {
            a = digits_from(3, "address register");
        } else if (!t.empty() && t[0] == 'A') {
            a = digits_from(1, "address register");
        } else {
            throw AssemblyError("expected an address register, got '" + t + "'", line,
                    tok.column);
        }
        if (a >= kAddressRegisterCount) {
            throw AssemblyError("address register A" + std::to_string(a) + " out of range (0-" +
                            std::to_string(kAddressRegisterCount - 1) + ")",
                    line, tok.column);
        }
        return a;
    }
    case OperandKind::flag:
        if (t == "0") return 0;
        if (t == "1") return 1;
        throw AssemblyError("auto-increment flag must be 0 or 1, got '" + t + "'", line,
                tok.column);
    }
    return 0;
}

inline std::vector<OperandKind> operand_kinds(OperandShape shape)
{
    using K = OperandKind;
    switch (shape) {
    case OperandShape::binary: return {K::reg, K::reg, K::reg};
    case OperandShape::unary: return {K::reg, K::reg};
    case OperandShape::load: return {K::reg, K::addr, K::flag};
    case OperandShape::store: return {K::addr, K::reg, K::flag};
    case OperandShape::capture: return {K::reg};
    }
    return {};
}

inline Instruction parse_line(std::string_view body, std::size_t line)
{
    std::size_t pos = 0;
    const auto skip_space = [&] {
        while (pos < body.size() && std::isspace(static_cast<unsigned char>(body[pos]))) ++pos;
    };

    skip_space();
    const std::size_t mnemonic_col = pos + 1;
    const std::size_t mnemonic_begin = pos;
    while (pos < body.size() &&
            (std::isalnum(static_cast<unsigned char>(body[pos])) || body[pos] == '_')) {
        ++pos;
    }
    const std::string mnemonic_text(body.substr(mnemonic_begin, pos - mnemonic_begin));
    if (mnemonic_text.empty()) {
        throw AssemblyError("expected a mnemonic", line, mnemonic_col);
    }
    const auto op = parse_mnemonic(mnemonic_text);
    if (!op) {
        throw AssemblyError("unknown mnemonic '" + mnemonic_text + "'", line, mnemonic_col);
    }

    skip_space();
    bool call_form = false;
    if (pos < body.size() && body[pos] == '(') {
        call_form = true;
        ++pos;
    }

    std::vector<Token> operands;
    bool closed = !call_form;
    while (true) {
        skip_space();
        if (pos >= body.size()) break;
        if (call_form && body[pos] == ')') {
            closed = true;
            ++pos;
            skip_space();
            if (pos < body.size()) {
                throw AssemblyError("unexpected text after ')'", line, pos + 1);
            }
            break;
        }
        Token tok;
        tok.column = pos + 1;
        while (pos < body.size() && body[pos] != ',' && body[pos] != ')' &&
                !std::isspace(static_cast<unsigned char>(body[pos]))) {
            tok.text.push_back(body[pos++]);
        }
        if (tok.text.empty()) {
            throw AssemblyError("empty operand", line, tok.column);
        }
        operands.push_back(std::move(tok));
        skip_space();
        if (pos < body.size() && body[pos] == ',') {
            ++pos;
            skip_space();
            if (pos >= body.size() || body[pos] == ')') {
                throw AssemblyError("dangling ','", line, pos + 1);
            }
        } else if (pos < body.size() && body[pos] != ')') {
            throw AssemblyError("expected ',' between operands", line, pos + 1);
        }
    }
    if (!closed) {
        throw AssemblyError("missing ')'", line, body.size() + 1);
    }

    const auto kinds = operand_kinds(shape_of(*op));
    if (operands.size() != kinds.size()) {
        throw AssemblyError(mnemonic_text + " takes " + std::to_string(kinds.size()) +
                        " operands, got " + std::to_string(operands.size()),
                line, mnemonic_col);
    }

    std::array<int, 3> v{};
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        v[i] = parse_operand(operands[i], kinds[i], line);
    }

    Instruction ins;
    ins.op = *op;
    switch (shape_of(*op)) {
    case OperandShape::binary:
        ins.dst = static_cast<std::uint8_t>(v[0]);
        ins.src_a = static_cast<std::uint8_t>(v[1]);
        ins.src_b = static_cast<std::uint8_t>(v[2]);
        break;
    case OperandShape::unary:
        ins.dst = static_cast<std::uint8_t>(v[0]);
        ins.src_a = static_cast<std::uint8_t>(v[1]);
        break;
    case OperandShape::load:
    case OperandShape::store:
        ins.dst = static_cast<std::uint8_t>(v[0]);
        ins.src_a = static_cast<std::uint8_t>(v[1]);
        ins.auto_inc = v[2] == 1;
        break;
    case OperandShape::capture: ins.src_a = static_cast<std::uint8_t>(v[0]); break;
    }
    return ins;
}

} // namespace detail

/// Parses micro-kernel source. Throws AssemblyError with the offending
/// position, or ValidationError for an empty or oversized kernel.
inline MicroKernel assemble(std::string_view text, std::string name = "kernel")
{
    MicroKernel kernel;
    kernel.name = std::move(name);
    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        std::string_view line = text.substr(begin, end - begin);
        if (auto c = line.find("//"); c != std::string_view::npos) {
            line = line.substr(0, c);
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        const bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
        if (!blank) {
            kernel.instructions.push_back(detail::parse_line(line, line_no));
        }
        begin = end + 1;
    }
    kernel.validate();
    return kernel;
}

inline std::string format_instruction(const Instruction &ins)
{
    std::ostringstream out;
    out << name_of(ins.op) << ' ';
    switch (shape_of(ins.op)) {
    case OperandShape::binary:
        out << 'R' << int(ins.dst) << ", R" << int(ins.src_a) << ", R" << int(ins.src_b);
        break;
    case OperandShape::unary: out << 'R' << int(ins.dst) << ", R" << int(ins.src_a); break;
    case OperandShape::load:
        out << 'R' << int(ins.dst) << ", A" << int(ins.src_a) << ", " << (ins.auto_inc ? 1 : 0);
        break;
    case OperandShape::store:
        out << 'A' << int(ins.dst) << ", R" << int(ins.src_a) << ", " << (ins.auto_inc ? 1 : 0);
        break;
    case OperandShape::capture: out << 'R' << int(ins.src_a); break;
    }
    return out.str();
}

/// Canonical text, one instruction per line; assemble() inverts it.
inline std::string disassemble(const MicroKernel &kernel)
{
    std::string out;
    for (const auto &ins : kernel.instructions) {
        out += format_instruction(ins);
        out += '\n';
    }
    return out;
}

} // namespace seneca
