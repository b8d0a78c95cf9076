#include "funcdec/expr.hpp"

#include "funcdec/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <algorithm>

namespace funcdec {

std::string Token::text() const {
    switch (kind) {
    case TokenKind::UnaryMinus: return "neg";
    case TokenKind::OutputMarker: return "•";
    default: return lexeme;
    }
}

std::optional<OperatorInfo> OperatorTable::lookup(const Token& t) {
    if (t.kind == TokenKind::UnaryMinus) return OperatorInfo{3, Associativity::Right, 1, false};
    if (t.kind != TokenKind::BinaryOp || t.lexeme.size() != 1) return std::nullopt;
    switch (t.lexeme[0]) {
    case '^': return OperatorInfo{4, Associativity::Right, 2, false};
    case '*': return OperatorInfo{2, Associativity::Left, 2, true};
    case '/': return OperatorInfo{2, Associativity::Left, 2, false};
    case '+': return OperatorInfo{1, Associativity::Left, 2, false};
    case '-': return OperatorInfo{1, Associativity::Left, 2, false};
    default: return std::nullopt;
    }
}

bool OperatorTable::pops_before(const Token& top, const Token& incoming) {
    const auto t = lookup(top);
    const auto in = lookup(incoming);
    if (!t || !in) return false;
    if (t->precedence > in->precedence) return true;
    if (t->precedence < in->precedence) return false;
    return t->assoc == Associativity::Left && !t->associative;
}

std::string RpnExpr::to_string() const {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t.text();
    }
    return out;
}

std::vector<std::string> RpnExpr::variables() const {
    std::vector<std::string> vars;
    for (const auto& t : tokens) {
        if (t.kind == TokenKind::Variable && std::find(vars.begin(), vars.end(), t.lexeme) == vars.end()) {
            vars.push_back(t.lexeme);
        }
    }
    return vars;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

bool operand_context(const std::vector<Token>& out) {
    if (out.empty()) return true;
    switch (out.back().kind) {
    case TokenKind::BinaryOp:
    case TokenKind::UnaryMinus:
    case TokenKind::LeftParen:
    case TokenKind::Function: return true;
    default: return false;
    }
}

std::size_t lex_number(std::string_view s, std::size_t i, std::vector<Token>& out) {
    const std::size_t start = i;
    while (i < s.size() && digit(s[i])) ++i;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && digit(s[i])) ++i;
    }
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
        if (j >= s.size() || !digit(s[j])) throw ParseError("malformed number exponent", start);
        while (j < s.size() && digit(s[j])) ++j;
        i = j;
    }
    const std::string_view text = s.substr(start, i - start);
    if (text == ".") throw ParseError("malformed number", start);
    if (i < s.size() && (s[i] == '.' || ident_char(s[i]))) {
        throw ParseError("malformed number '" + std::string(s.substr(start, i - start + 1)) + "'", start);
    }
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
        throw ParseError("malformed number '" + std::string(text) + "'", start);
    }
    out.push_back({TokenKind::Number, std::string(text), value, start});
    return i;
}

} // namespace

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (digit(c) || (c == '.' && i + 1 < s.size() && digit(s[i + 1]))) {
            i = lex_number(s, i, out);
            continue;
        }
        if (ident_start(c)) {
            const std::size_t start = i;
            while (i < s.size() && ident_char(s[i])) ++i;
            std::string word(s.substr(start, i - start));
            std::size_t j = i;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            const bool call = j < s.size() && s[j] == '(';
            if (function_from_name(word)) {
                if (!call) throw ParseError("function '" + word + "' must be followed by '('", start);
                out.push_back({TokenKind::Function, std::move(word), 0.0, start});
            } else if (call) {
                throw ParseError("unknown function '" + word + "'", start);
            } else {
                out.push_back({TokenKind::Variable, std::move(word), 0.0, start});
            }
            continue;
        }
        switch (c) {
        case '(': out.push_back({TokenKind::LeftParen, "(", 0.0, i}); break;
        case ')': out.push_back({TokenKind::RightParen, ")", 0.0, i}); break;
        case '-':
            if (operand_context(out)) {
                out.push_back({TokenKind::UnaryMinus, "-", 0.0, i});
                break;
            }
            [[fallthrough]];
        case '+':
        case '*':
        case '/':
        case '^': out.push_back({TokenKind::BinaryOp, std::string(1, c), 0.0, i}); break;
        default: throw ParseError(std::string("unexpected character '") + c + "'", i);
        }
        ++i;
    }
    return out;
}

RpnExpr to_rpn(const std::vector<Token>& tokens) {
    if (tokens.empty()) throw ParseError("empty expression", 0);
    RpnExpr rpn;
    std::vector<Token> stack;
    bool expect_operand = true;

    for (const auto& t : tokens) {
        switch (t.kind) {
        case TokenKind::Number:
        case TokenKind::Variable:
            if (!expect_operand) throw ParseError("missing operator before '" + t.lexeme + "' (implicit multiplication is not supported)", t.position);
            rpn.tokens.push_back(t);
            expect_operand = false;
            break;
        case TokenKind::Function:
        case TokenKind::UnaryMinus:
        case TokenKind::LeftParen:
            if (!expect_operand) throw ParseError("missing operator before '" + t.lexeme + "'", t.position);
            stack.push_back(t);
            break;
        case TokenKind::BinaryOp:
            if (expect_operand) throw ParseError("operator '" + t.lexeme + "' is missing an operand", t.position);
            while (!stack.empty() && OperatorTable::pops_before(stack.back(), t)) {
                rpn.tokens.push_back(stack.back());
                stack.pop_back();
            }
            stack.push_back(t);
            expect_operand = true;
            break;
        case TokenKind::RightParen: {
            if (expect_operand) throw ParseError("missing operand before ')'", t.position);
            while (!stack.empty() && stack.back().kind != TokenKind::LeftParen) {
                rpn.tokens.push_back(stack.back());
                stack.pop_back();
            }
            if (stack.empty()) throw ParseError("mismatched ')'", t.position);
            stack.pop_back();
            if (!stack.empty() && stack.back().kind == TokenKind::Function) {
                rpn.tokens.push_back(stack.back());
                stack.pop_back();
            }
            break;
        }
        case TokenKind::OutputMarker:
            throw ParseError("output marker is not valid in infix input", t.position);
        }
    }
    if (expect_operand) throw ParseError("expression ends with a missing operand", tokens.back().position);
    while (!stack.empty()) {
        if (stack.back().kind == TokenKind::LeftParen) throw ParseError("mismatched '('", stack.back().position);
        rpn.tokens.push_back(stack.back());
        stack.pop_back();
    }
    return rpn;
}

double eval_rpn(const RpnExpr& rpn, const Assignment& assignment) {
    std::vector<double> stack;
    auto pop = [&stack]() {
        if (stack.empty()) throw Error("malformed RPN: stack underflow");
        const double v = stack.back();
        stack.pop_back();
        return v;
    };
    for (const auto& t : rpn.tokens) {
        switch (t.kind) {
        case TokenKind::Number: stack.push_back(t.value); break;
        case TokenKind::Variable: {
            const auto it = assignment.find(t.lexeme);
            if (it == assignment.end()) throw Error("unassigned variable '" + t.lexeme + "'");
            stack.push_back(it->second);
            break;
        }
        case TokenKind::Function: stack.push_back(apply_unary(*function_from_name(t.lexeme), pop())); break;
        case TokenKind::UnaryMinus: stack.push_back(-pop()); break;
        case TokenKind::BinaryOp: {
            const double b = pop();
            const double a = pop();
            double r = 0.0;
            switch (t.lexeme[0]) {
            case '+': r = a + b; break;
            case '-': r = a - b; break;
            case '*': r = a * b; break;
            case '/': r = apply_binary(Prim::Div, a, b); break;
            case '^': r = apply_binary(Prim::Pow, a, b); break;
            default: throw Error("unknown operator '" + t.lexeme + "'");
            }
            if (!std::isfinite(r)) throw DomainError("non-finite intermediate value");
            stack.push_back(r);
            break;
        }
        case TokenKind::OutputMarker: break;
        case TokenKind::LeftParen:
        case TokenKind::RightParen: throw Error("malformed RPN: parenthesis token");
        }
    }
    if (stack.size() != 1) throw Error("malformed RPN: expected exactly one result");
    return stack.back();
}

} // namespace funcdec
