#include "nlbvp/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace nlbvp::expr {

namespace {

NodePtr make_const(double v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Const;
    n->value = v;
    return n;
}

NodePtr make_var(Var v) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Variable;
    n->var = v;
    return n;
}

NodePtr make_neg(NodePtr a) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Neg;
    n->a = std::move(a);
    return n;
}

NodePtr make_bin(BinOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

NodePtr make_call(Fn fn, NodePtr a, NodePtr b = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Call;
    n->fn = fn;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

struct Token {
    enum class Kind { Number, Ident, Op, LParen, RParen, Comma, End };
    Kind kind;
    double number = 0.0;
    std::string ident;
    char op = 0;
    std::size_t offset = 0;
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    Token next() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        Token t;
        t.offset = pos_;
        if (pos_ >= text_.size()) {
            t.kind = Token::Kind::End;
            return t;
        }
        char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.data() + pos_;
            char* end = nullptr;
            t.number = std::strtod(begin, &end);
            if (end == begin)
                throw SyntaxError("malformed number", pos_);
            pos_ += static_cast<std::size_t>(end - begin);
            t.kind = Token::Kind::Number;
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            t.kind = Token::Kind::Ident;
            t.ident = std::string(text_.substr(start, pos_ - start));
            return t;
        }
        ++pos_;
        switch (c) {
            case '+': case '-': case '*': case '/': case '^':
                t.kind = Token::Kind::Op;
                t.op = c;
                return t;
            case '(': t.kind = Token::Kind::LParen; return t;
            case ')': t.kind = Token::Kind::RParen; return t;
            case ',': t.kind = Token::Kind::Comma; return t;
            default:
                throw SyntaxError(std::string("unexpected character '") + c + "'", t.offset);
        }
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    explicit Parser(std::string_view text) : lex_(text) { advance(); }

    Expr run() {
        NodePtr e = parse_sum();
        if (tok_.kind != Token::Kind::End)
            throw SyntaxError("trailing input after expression", tok_.offset);
        return Expr(std::move(e));
    }

private:
    void advance() { tok_ = lex_.next(); }

    bool accept_op(char c) {
        if (tok_.kind == Token::Kind::Op && tok_.op == c) {
            advance();
            return true;
        }
        return false;
    }

    void expect(Token::Kind kind, const char* what) {
        if (tok_.kind != kind)
            throw SyntaxError(std::string("expected ") + what, tok_.offset);
        advance();
    }

    NodePtr parse_sum() {
        NodePtr lhs = parse_product();
        for (;;) {
            if (accept_op('+'))
                lhs = make_bin(BinOp::Add, std::move(lhs), parse_product());
            else if (accept_op('-'))
                lhs = make_bin(BinOp::Sub, std::move(lhs), parse_product());
            else
                return lhs;
        }
    }

    NodePtr parse_product() {
        NodePtr lhs = parse_unary();
        for (;;) {
            if (accept_op('*'))
                lhs = make_bin(BinOp::Mul, std::move(lhs), parse_unary());
            else if (accept_op('/'))
                lhs = make_bin(BinOp::Div, std::move(lhs), parse_unary());
            else
                return lhs;
        }
    }

    NodePtr parse_unary() {
        if (accept_op('-'))
            return make_neg(parse_unary());
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_primary();
        if (accept_op('^')) {
            // Right-associative; the exponent may start with a unary minus.
            NodePtr exponent = parse_unary();
            return make_bin(BinOp::Pow, std::move(base), std::move(exponent));
        }
        return base;
    }

    NodePtr parse_primary() {
        switch (tok_.kind) {
            case Token::Kind::Number: {
                double v = tok_.number;
                advance();
                return make_const(v);
            }
            case Token::Kind::Ident:
                return parse_ident();
            case Token::Kind::LParen: {
                advance();
                NodePtr e = parse_sum();
                expect(Token::Kind::RParen, "')'");
                return e;
            }
            case Token::Kind::End:
                throw SyntaxError("empty operand", tok_.offset);
            default:
                throw SyntaxError("expected operand", tok_.offset);
        }
    }

    NodePtr parse_ident() {
        const std::string name = tok_.ident;
        const std::size_t offset = tok_.offset;
        advance();

        if (name == "x") return make_var(Var::X);
        if (name == "y") return make_var(Var::Y);
        if (name == "r") return make_var(Var::R);
        if (name == "lambda") return make_var(Var::Lambda);

        Fn fn;
        bool binary = false;
        if (name == "exp") fn = Fn::Exp;
        else if (name == "sin") fn = Fn::Sin;
        else if (name == "cos") fn = Fn::Cos;
        else if (name == "ln") fn = Fn::Ln;
        else if (name == "sqrt") fn = Fn::Sqrt;
        else if (name == "abs") fn = Fn::Abs;
        else if (name == "arcsin") fn = Fn::Arcsin;
        else if (name == "min") { fn = Fn::Min; binary = true; }
        else if (name == "max") { fn = Fn::Max; binary = true; }
        else throw SyntaxError("unknown identifier '" + name + "'", offset);

        expect(Token::Kind::LParen, "'(' after function name");
        NodePtr a = parse_sum();
        NodePtr b;
        if (binary) {
            expect(Token::Kind::Comma, "',' between arguments");
            b = parse_sum();
        }
        expect(Token::Kind::RParen, "')'");
        return make_call(fn, std::move(a), std::move(b));
    }

    Lexer lex_;
    Token tok_;
};

double eval_node(const Node& n, const Bindings& env) {
    switch (n.kind) {
        case Node::Kind::Const:
            return n.value;
        case Node::Kind::Variable: {
            auto v = env.lookup(n.var);
            if (!v)
                throw UnboundVariable(std::string("variable '") + var_name(n.var) + "' is not bound");
            return *v;
        }
        case Node::Kind::Neg:
            return -eval_node(*n.a, env);
        case Node::Kind::Binary: {
            double a = eval_node(*n.a, env);
            double b = eval_node(*n.b, env);
            switch (n.op) {
                case BinOp::Add: return a + b;
                case BinOp::Sub: return a - b;
                case BinOp::Mul: return a * b;
                case BinOp::Div:
                    if (b == 0.0) throw DomainError("division by zero");
                    return a / b;
                case BinOp::Pow: {
                    if (a < 0.0 && b != std::floor(b))
                        throw DomainError("negative base with non-integer exponent");
                    if (a == 0.0 && b < 0.0)
                        throw DomainError("zero base with negative exponent");
                    return std::pow(a, b);
                }
            }
            break;
        }
        case Node::Kind::Call: {
            double a = eval_node(*n.a, env);
            switch (n.fn) {
                case Fn::Exp: return std::exp(a);
                case Fn::Sin: return std::sin(a);
                case Fn::Cos: return std::cos(a);
                case Fn::Ln:
                    if (a <= 0.0) throw DomainError("ln of non-positive value");
                    return std::log(a);
                case Fn::Sqrt:
                    if (a < 0.0) throw DomainError("sqrt of negative value");
                    return std::sqrt(a);
                case Fn::Abs: return std::fabs(a);
                case Fn::Arcsin:
                    if (a < -1.0 || a > 1.0) throw DomainError("arcsin argument outside [-1, 1]");
                    return std::asin(a);
                case Fn::Min: return std::fmin(a, eval_node(*n.b, env));
                case Fn::Max: return std::fmax(a, eval_node(*n.b, env));
            }
            break;
        }
    }
    throw Error("corrupt expression node");
}

const char* fn_name(Fn fn) {
    switch (fn) {
        case Fn::Exp: return "exp";
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Ln: return "ln";
        case Fn::Sqrt: return "sqrt";
        case Fn::Abs: return "abs";
        case Fn::Arcsin: return "arcsin";
        case Fn::Min: return "min";
        case Fn::Max: return "max";
    }
    return "?";
}

// Precedence levels used when deciding where parentheses are required.
int precedence(const Node& n) {
    switch (n.kind) {
        case Node::Kind::Const:
        case Node::Kind::Variable:
        case Node::Kind::Call:
            return 100;
        case Node::Kind::Neg:
            return 30;
        case Node::Kind::Binary:
            switch (n.op) {
                case BinOp::Add: case BinOp::Sub: return 10;
                case BinOp::Mul: case BinOp::Div: return 20;
                case BinOp::Pow: return 40;
            }
    }
    return 0;
}

void print_node(const Node& n, std::string& out);

void print_child(const Node& child, int min_prec, std::string& out) {
    bool parens = precedence(child) < min_prec;
    // A negative constant prints with a leading '-', so protect it the
    // same way as an explicit negation.
    if (child.kind == Node::Kind::Const && child.value < 0.0 && min_prec > 30) parens = true;
    if (parens) out += '(';
    print_node(child, out);
    if (parens) out += ')';
}

void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
        case Node::Kind::Const: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", n.value);
            out += buf;
            return;
        }
        case Node::Kind::Variable:
            out += var_name(n.var);
            return;
        case Node::Kind::Neg:
            out += '-';
            print_child(*n.a, 31, out);
            return;
        case Node::Kind::Binary: {
            const char* op = nullptr;
            int prec = precedence(n);
            // Left-associative operators parenthesize a same-precedence
            // right child so the printed form reparses to the same tree.
            int lhs_min = prec, rhs_min = prec + 1;
            switch (n.op) {
                case BinOp::Add: op = " + "; break;
                case BinOp::Sub: op = " - "; break;
                case BinOp::Mul: op = "*"; break;
                case BinOp::Div: op = "/"; break;
                case BinOp::Pow: op = "^"; lhs_min = prec + 1; rhs_min = prec; break;
            }
            print_child(*n.a, lhs_min, out);
            out += op;
            print_child(*n.b, rhs_min, out);
            return;
        }
        case Node::Kind::Call:
            out += fn_name(n.fn);
            out += '(';
            print_node(*n.a, out);
            if (n.b) {
                out += ", ";
                print_node(*n.b, out);
            }
            out += ')';
            return;
    }
}

bool nodes_equal(const NodePtr& a, const NodePtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    switch (a->kind) {
        case Node::Kind::Const:
            // Bitwise comparison: print/parse round-trips doubles exactly.
            return a->value == b->value ||
                   (std::isnan(a->value) && std::isnan(b->value));
        case Node::Kind::Variable:
            return a->var == b->var;
        case Node::Kind::Neg:
            return nodes_equal(a->a, b->a);
        case Node::Kind::Binary:
            return a->op == b->op && nodes_equal(a->a, b->a) && nodes_equal(a->b, b->b);
        case Node::Kind::Call:
            return a->fn == b->fn && nodes_equal(a->a, b->a) && nodes_equal(a->b, b->b);
    }
    return false;
}

}  // namespace

const char* var_name(Var v) {
    switch (v) {
        case Var::X: return "x";
        case Var::Y: return "y";
        case Var::R: return "r";
        case Var::Lambda: return "lambda";
    }
    return "?";
}

Bindings& Bindings::bind(Var v, double value) {
    auto& slot = vals_[static_cast<int>(v)];
    if (slot)
        throw InvariantViolation(std::string("variable '") + var_name(v) + "' bound twice");
    if (v == Var::R) {
        auto x = vals_[static_cast<int>(Var::X)];
        auto y = vals_[static_cast<int>(Var::Y)];
        if (x && y) {
            double derived = std::hypot(*x, *y);
            if (std::fabs(derived - value) > 1e-12 * (1.0 + std::fabs(derived)))
                throw InvariantViolation("explicit r binding inconsistent with bound x, y");
        }
    }
    slot = value;
    return *this;
}

std::optional<double> Bindings::lookup(Var v) const {
    auto& slot = vals_[static_cast<int>(v)];
    if (slot) return slot;
    if (v == Var::R) {
        auto x = vals_[static_cast<int>(Var::X)];
        auto y = vals_[static_cast<int>(Var::Y)];
        if (x && y) return std::hypot(*x, *y);
    }
    return std::nullopt;
}

double Expr::eval(const Bindings& env) const {
    if (!root_) throw Error("evaluating empty expression");
    return eval_node(*root_, env);
}

std::string Expr::print() const {
    if (!root_) return "";
    std::string out;
    print_node(*root_, out);
    return out;
}

bool structurally_equal(const Expr& lhs, const Expr& rhs) {
    return nodes_equal(lhs.root(), rhs.root());
}

Expr parse(std::string_view text) {
    if (text.empty())
        throw SyntaxError("empty expression", 0);
    return Parser(text).run();
}

}  // namespace nlbvp::expr
