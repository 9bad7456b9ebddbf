#include "cc/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace cc {

namespace {

struct Lexer {
    const std::string& s;
    size_t i = 0;

    explicit Lexer(const std::string& str) : s(str) {}

    void skip_ws() {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    }
    bool done() {
        skip_ws();
        return i >= s.size();
    }
    char peek() {
        skip_ws();
        return i < s.size() ? s[i] : '\0';
    }
    char take() {
        skip_ws();
        return s[i++];
    }
};

double parse_number(Lexer& lx) {
    lx.skip_ws();
    size_t start = lx.i;
    size_t end = start;
    while (end < lx.s.size()) {
        char c = lx.s[end];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' ||
            ((c == 'e' || c == 'E') && end > start) ||
            ((c == '+' || c == '-') && end > start &&
             (lx.s[end - 1] == 'e' || lx.s[end - 1] == 'E'))) {
            ++end;
        } else {
            break;
        }
    }
    if (end == start) throw ParseError("expected number at '" + lx.s.substr(start) + "'");
    lx.i = end;
    return std::stod(lx.s.substr(start, end - start));
}

}  // namespace

Polynomial Polynomial::parse(const std::string& text, int nvars) {
    Polynomial p(nvars);
    Lexer lx(text);
    if (lx.done()) throw ParseError("empty polynomial");

    while (!lx.done()) {
        double sign = 1.0;
        // leading signs of this monomial
        while (lx.peek() == '+' || lx.peek() == '-') {
            if (lx.take() == '-') sign = -sign;
        }
        double coef = sign;
        std::vector<int> pows(nvars, 0);
        bool saw_factor = false;
        for (;;) {
            char c = lx.peek();
            if (c == 'x' || c == 'X') {
                lx.take();
                int idx = static_cast<int>(parse_number(lx));
                if (idx < 1 || idx > nvars)
                    throw ParseError("variable index out of range in '" + text + "'");
                int pw = 1;
                if (lx.peek() == '^') {
                    lx.take();
                    double e = parse_number(lx);
                    pw = static_cast<int>(e);
                    if (pw < 0 || e != pw) throw ParseError("bad exponent in '" + text + "'");
                }
                pows[idx - 1] += pw;
                saw_factor = true;
            } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                coef *= parse_number(lx);
                saw_factor = true;
            } else {
                throw ParseError("unexpected character '" + std::string(1, c) + "' in '" +
                                 text + "'");
            }
            if (lx.peek() == '*') {
                lx.take();
                continue;
            }
            break;
        }
        if (!saw_factor) throw ParseError("dangling sign in '" + text + "'");
        p.add_term(coef, std::move(pows));
    }
    p.compress();
    return p;
}

Polynomial Polynomial::constant(double c, int nvars) {
    Polynomial p(nvars);
    if (c != 0.0) p.add_term(c, std::vector<int>(nvars, 0));
    return p;
}

void Polynomial::add_term(double coef, std::vector<int> pows) {
    if (coef == 0.0) return;
    terms_.push_back(Monomial{coef, std::move(pows)});
}

double Polynomial::eval(const Vector& x) const {
    double sum = 0.0;
    for (const auto& m : terms_) {
        double v = m.coef;
        for (int j = 0; j < nvars_; ++j) {
            int p = m.pows[j];
            double xj = x[j];
            while (p-- > 0) v *= xj;
        }
        sum += v;
    }
    return sum;
}

Polynomial Polynomial::derivative(int var) const {
    Polynomial out(nvars_);
    for (const auto& m : terms_) {
        if (m.pows[var] == 0) continue;
        auto pows = m.pows;
        double coef = m.coef * pows[var];
        pows[var] -= 1;
        out.add_term(coef, std::move(pows));
    }
    out.compress();
    return out;
}

Polynomial Polynomial::operator+(const Polynomial& other) const {
    Polynomial out(nvars_);
    out.terms_ = terms_;
    out.terms_.insert(out.terms_.end(), other.terms_.begin(), other.terms_.end());
    out.compress();
    return out;
}

Polynomial Polynomial::operator-(const Polynomial& other) const {
    Polynomial neg(other.nvars_);
    neg.terms_ = other.terms_;
    for (auto& m : neg.terms_) m.coef = -m.coef;
    return *this + neg;
}

Polynomial Polynomial::operator*(const Polynomial& other) const {
    Polynomial out(nvars_);
    for (const auto& a : terms_) {
        for (const auto& b : other.terms_) {
            std::vector<int> pows(nvars_);
            for (int j = 0; j < nvars_; ++j) pows[j] = a.pows[j] + b.pows[j];
            out.add_term(a.coef * b.coef, std::move(pows));
        }
    }
    out.compress();
    return out;
}

void Polynomial::compress() {
    std::map<std::vector<int>, double> acc;
    for (const auto& m : terms_) acc[m.pows] += m.coef;
    terms_.clear();
    for (auto& [pows, coef] : acc) {
        if (coef != 0.0) terms_.push_back(Monomial{coef, pows});
    }
}

bool Polynomial::is_zero(double eps) const {
    for (const auto& m : terms_)
        if (std::abs(m.coef) > eps) return false;
    return true;
}

int Polynomial::total_degree() const {
    int deg = 0;
    for (const auto& m : terms_) {
        int d = 0;
        for (int p : m.pows) d += p;
        deg = std::max(deg, d);
    }
    return deg;
}

std::string Polynomial::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& m : terms_) {
        if (!first) os << (m.coef >= 0 ? " + " : " - ");
        else if (m.coef < 0) os << "-";
        first = false;
        os << std::abs(m.coef);
        for (int j = 0; j < nvars_; ++j) {
            if (m.pows[j] > 0) {
                os << "*x" << (j + 1);
                if (m.pows[j] > 1) os << "^" << m.pows[j];
            }
        }
    }
    return os.str();
}

void PolyField::eval_into(const Vector& x, double* out) const {
    for (int k = 0; k < dim(); ++k) out[k] = components[k].eval(x);
}

Vector PolyField::eval(const Vector& x) const {
    Vector v(dim());
    eval_into(x, v.data());
    return v;
}

PolyField lie_bracket_field(const PolyField& a, const PolyField& b) {
    const int n = a.dim();
    PolyField out;
    out.components.reserve(n);
    for (int k = 0; k < n; ++k) {
        Polynomial comp(a.components[k].nvars());
        for (int l = 0; l < n; ++l) {
            comp = comp + a.components[l] * b.components[k].derivative(l);
            comp = comp - b.components[l] * a.components[k].derivative(l);
        }
        out.components.push_back(std::move(comp));
    }
    return out;
}

}  // namespace cc
