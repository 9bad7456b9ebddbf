#pragma once

#include <string>
#include <vector>

#include "cc/types.hpp"

namespace cc {

/// Sparse polynomial in nvars variables, stored as a monomial table.
/// Evaluation and differentiation are exact; this is what makes Lie
/// brackets of the frame fields free of finite-difference error.
class Polynomial {
  public:
    struct Monomial {
        double coef = 0.0;
        std::vector<int> pows;  // one exponent per variable
    };

    Polynomial() = default;
    explicit Polynomial(int nvars) : nvars_(nvars) {}

    /// Parses expressions such as "1", "-0.5*x2", "0.1*x1^2*x2 + 3".
    /// Grammar: sum of monomials, each a '*'-separated product of a
    /// numeric coefficient and factors x{i} or x{i}^{p}, p >= 0.
    static Polynomial parse(const std::string& text, int nvars);

    static Polynomial constant(double c, int nvars);

    double eval(const Vector& x) const;
    Polynomial derivative(int var) const;

    Polynomial operator+(const Polynomial& other) const;
    Polynomial operator-(const Polynomial& other) const;
    Polynomial operator*(const Polynomial& other) const;

    void add_term(double coef, std::vector<int> pows);

    int nvars() const { return nvars_; }
    const std::vector<Monomial>& terms() const { return terms_; }
    bool is_zero(double eps = 0.0) const;
    int total_degree() const;

    std::string to_string() const;

  private:
    void compress();

    int nvars_ = 0;
    std::vector<Monomial> terms_;
};

/// Polynomial vector field on R^n: one component polynomial per coordinate.
struct PolyField {
    std::vector<Polynomial> components;

    int dim() const { return static_cast<int>(components.size()); }
    void eval_into(const Vector& x, double* out) const;
    Vector eval(const Vector& x) const;
};

/// Lie bracket [a, b] = (Db)a - (Da)b, computed symbolically.
PolyField lie_bracket_field(const PolyField& a, const PolyField& b);

}  // namespace cc
