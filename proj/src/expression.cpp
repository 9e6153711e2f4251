#include "gspec/expression.hpp"

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

namespace gspec {

namespace {

struct Node {
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Call, Indicator } op;
    cd value{};
    std::string fn;
    std::size_t pos = 0;
    std::unique_ptr<Node> lhs, rhs;
};

using NodePtr = std::unique_ptr<Node>;

NodePtr make_node(Node::Op op, std::size_t pos, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_unique<Node>();
    n->op = op;
    n->pos = pos;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

bool is_unary_function(const std::string& name) {
    return name == "exp" || name == "sin" || name == "cos" || name == "abs" || name == "sqrt" ||
           name == "conj" || name == "re" || name == "im";
}

class Parser {
public:
    explicit Parser(std::string_view text) : src_(text) {}

    NodePtr parse() {
        NodePtr e = expr();
        skip_ws();
        if (pos_ != src_.size())
            throw ParseError(pos_, std::string("unexpected '") + src_[pos_] + "'");
        return e;
    }

    bool uses_variable() const noexcept { return uses_t_; }

private:
    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            if (pos_ >= src_.size())
                throw ParseError(pos_, std::string("expected '") + c + "' but input ended");
            throw ParseError(pos_, std::string("expected '") + c + "'");
        }
    }

    NodePtr expr() {
        NodePtr lhs = term();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('+'))
                lhs = make_node(Node::Op::Add, at, std::move(lhs), term());
            else if (accept('-'))
                lhs = make_node(Node::Op::Sub, at, std::move(lhs), term());
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('*'))
                lhs = make_node(Node::Op::Mul, at, std::move(lhs), unary());
            else if (accept('/'))
                lhs = make_node(Node::Op::Div, at, std::move(lhs), unary());
            else
                return lhs;
        }
    }

    NodePtr unary() {
        skip_ws();
        const std::size_t at = pos_;
        if (accept('-'))
            return make_node(Node::Op::Neg, at, unary());
        if (accept('+'))
            return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        skip_ws();
        const std::size_t at = pos_;
        if (accept('^'))
            return make_node(Node::Op::Pow, at, std::move(base), unary());
        return base;
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-'))
                ++look;
            if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
                pos_ = look;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                    ++pos_;
            }
        }
        const std::string lexeme(src_.substr(start, pos_ - start));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(lexeme, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != lexeme.size())
            throw ParseError(start, "malformed number '" + lexeme + "'");
        auto n = make_node(Node::Op::Const, start);
        n->value = v;
        return n;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= src_.size())
            throw ParseError(pos_, "unexpected end of input");
        const std::size_t at = pos_;
        const char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number();
        if (accept('(')) {
            NodePtr inner = expr();
            expect(')');
            return inner;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_])))
                ++pos_;
            const std::string name(src_.substr(at, pos_ - at));
            if (name == "t") {
                uses_t_ = true;
                return make_node(Node::Op::Var, at);
            }
            if (name == "i" || name == "pi") {
                auto n = make_node(Node::Op::Const, at);
                n->value = name == "i" ? cd(0.0, 1.0) : cd(std::numbers::pi);
                return n;
            }
            if (is_unary_function(name)) {
                expect('(');
                auto n = make_node(Node::Op::Call, at, expr());
                n->fn = name;
                expect(')');
                return n;
            }
            if (name == "indicator") {
                uses_t_ = true;
                expect('(');
                NodePtr a = expr();
                expect(',');
                NodePtr b = expr();
                expect(')');
                return make_node(Node::Op::Indicator, at, std::move(a), std::move(b));
            }
            throw ParseError(at, "unknown identifier '" + name + "'");
        }
        throw ParseError(at, std::string("unexpected '") + c + "'");
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    bool uses_t_ = false;
};

cd apply_function(const std::string& fn, cd z) {
    if (fn == "exp") return std::exp(z);
    if (fn == "sin") return std::sin(z);
    if (fn == "cos") return std::cos(z);
    if (fn == "abs") return std::abs(z);
    if (fn == "sqrt") return std::sqrt(z);
    if (fn == "conj") return std::conj(z);
    if (fn == "re") return z.real();
    return z.imag();
}

cd evaluate(const Node& n, double t) {
    switch (n.op) {
    case Node::Op::Const: return n.value;
    case Node::Op::Var: return t;
    case Node::Op::Add: return evaluate(*n.lhs, t) + evaluate(*n.rhs, t);
    case Node::Op::Sub: return evaluate(*n.lhs, t) - evaluate(*n.rhs, t);
    case Node::Op::Mul: return evaluate(*n.lhs, t) * evaluate(*n.rhs, t);
    case Node::Op::Div: {
        const cd d = evaluate(*n.rhs, t);
        if (d == cd(0.0))
            throw Error(ErrorCode::EvalError, "division by zero at t = " + std::to_string(t) +
                                                  " (operator at position " + std::to_string(n.pos) + ")");
        return evaluate(*n.lhs, t) / d;
    }
    case Node::Op::Pow: {
        const cd base = evaluate(*n.lhs, t);
        const cd ex = evaluate(*n.rhs, t);
        // Integer exponents by repeated multiplication keep 0^k and negative bases exact.
        if (ex.imag() == 0.0 && ex.real() == std::round(ex.real()) && std::abs(ex.real()) <= 64) {
            const int k = static_cast<int>(ex.real());
            if (k < 0 && base == cd(0.0))
                throw Error(ErrorCode::EvalError, "zero raised to a negative power at t = " + std::to_string(t));
            cd r = 1.0;
            for (int j = 0; j < std::abs(k); ++j)
                r *= base;
            return k < 0 ? 1.0 / r : r;
        }
        return std::pow(base, ex);
    }
    case Node::Op::Neg: return -evaluate(*n.lhs, t);
    case Node::Op::Call: return apply_function(n.fn, evaluate(*n.lhs, t));
    case Node::Op::Indicator: {
        const double a = evaluate(*n.lhs, t).real();
        const double b = evaluate(*n.rhs, t).real();
        return (t > a && t < b) ? 1.0 : 0.0;
    }
    }
    return 0.0;
}

} // namespace

AlgebraElement parse_expression(std::string_view text, const AlgebraKind& kind) {
    Parser parser(text);
    const NodePtr root = parser.parse();
    if (!kind.is_function()) {
        if (parser.uses_variable())
            throw Error(ErrorCode::KindUnsupported, "expressions in t need a function kind");
        return constant(kind, evaluate(*root, 0.0));
    }
    std::vector<cd> values(static_cast<std::size_t>(kind.storage_size()));
    for (int i = 0; i < kind.storage_size(); ++i) {
        const cd v = evaluate(*root, kind.sample_point(i));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorCode::EvalError, "non-finite value at t = " + std::to_string(kind.sample_point(i)));
        values[static_cast<std::size_t>(i)] = v;
    }
    return AlgebraElement(kind, std::move(values));
}

} // namespace gspec
