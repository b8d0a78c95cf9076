#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "funcdec/primitive.hpp"

namespace funcdec {

enum class TokenKind {
    Number,
    Variable,
    Function,    // unary function call, e.g. sin
    BinaryOp,    // + - * / ^
    UnaryMinus,  // prefix '-', printed as "neg" in RPN
    LeftParen,
    RightParen,
    OutputMarker // identity marking a vector-valued output; never produced by the lexer
};

struct Token {
    TokenKind kind;
    std::string lexeme;
    double value = 0.0;          // numbers only
    std::size_t position = 0;    // byte offset in the source

    // Text used when printing RPN streams.
    std::string text() const;

    friend bool operator==(const Token& a, const Token& b) {
        return a.kind == b.kind && a.lexeme == b.lexeme && a.value == b.value;
    }
};

enum class Associativity { Left, Right };

struct OperatorInfo {
    int precedence;
    Associativity assoc;
    int arity;
    // `*` never forces an earlier `*` or `/` out of the stack, so `a*b*c`
    // compiles to `a b c * *` (grouping a*(b*c)). Every other left operator,
    // `+` included, groups left: `a+b+c` is `a b + c +`.
    bool associative;
};

// Precedence table: ^ (4, right) > neg (3) > * / (2, left) > + - (1, left).
struct OperatorTable {
    static std::optional<OperatorInfo> lookup(const Token& t);
    // True when `top` must be popped to the output before `incoming` is pushed.
    static bool pops_before(const Token& top, const Token& incoming);
};

struct RpnExpr {
    std::vector<Token> tokens;

    // Space-separated token texts, e.g. "x y z * +".
    std::string to_string() const;
    // Distinct variable names in first-appearance order.
    std::vector<std::string> variables() const;
    bool empty() const noexcept { return tokens.empty(); }
};

std::vector<Token> tokenize(std::string_view source);

// Shunting-yard conversion. Throws ParseError on mismatched parentheses,
// missing operands, or adjacent operands (implicit multiplication).
RpnExpr to_rpn(const std::vector<Token>& tokens);

inline RpnExpr parse(std::string_view source) { return to_rpn(tokenize(source)); }

using Assignment = std::map<std::string, double, std::less<>>;

// Stack evaluation of an RPN stream. Throws DomainError on primitive domain
// violations and Error on unassigned variables or malformed streams.
double eval_rpn(const RpnExpr& rpn, const Assignment& assignment);

} // namespace funcdec
