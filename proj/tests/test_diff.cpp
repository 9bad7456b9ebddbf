#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cc/builtin.hpp"
#include "cc/diff.hpp"

using namespace cc;

namespace {

Point pt3(double a, double b, double c) {
    Point p(3);
    p << a, b, c;
    return p;
}

Indicator graded_box(const CCStructure& S, double r) {
    return [&S, r](const Point& p) {
        for (int i = 0; i < S.N; ++i)
            if (std::abs(p[i]) > std::pow(r, S.degrees[i])) return false;
        return true;
    };
}

}  // namespace

TEST_CASE("map registry") {
    auto S = builtin_space("heisenberg");
    CHECK(list_maps().size() == 6);
    CHECK_THROWS_AS(make_map("frobnicate", S), ParseError);
    CHECK_THROWS_AS(make_map("dilation:0", S), ParseError);
    CHECK_THROWS_AS(make_map("dilation:a", S), ParseError);
    CHECK_THROWS_AS(make_map("left_translate:1,2", S), ParseError);
    try {
        make_map("frobnicate", S);
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("identity") != std::string::npos);
    }

    auto d2 = make_map("dilation:2", S);
    CHECK(d2.eval(pt3(1, 1, 1)).isApprox(pt3(2, 2, 4)));
    CHECK(d2.inverse(pt3(2, 2, 4)).isApprox(pt3(1, 1, 1)));

    auto lt = make_map("left_translate:0.3,-0.1,0.2", S);
    Point v = pt3(0.4, 0.2, -0.1);
    CHECK(lt.inverse(lt.eval(v)).isApprox(v, 1e-12));

    auto ns = make_map("nonsmooth_lipschitz", S);
    CHECK(ns.eval(pt3(-1, 1, 0)).isApprox(pt3(-1, 1, 0)));
    CHECK(ns.eval(pt3(1, 1, 0)).isApprox(pt3(1, 1.5, 0)));
    CHECK(ns.inverse(ns.eval(pt3(0.7, -0.2, 0.1))).isApprox(pt3(0.7, -0.2, 0.1)));
}

TEST_CASE("horizontal_derivative") {
    auto S = builtin_space("heisenberg");

    SUBCASE("identity gives the coordinate generators") {
        auto f = make_map("identity", S);
        Point g = pt3(0.3, -0.2, 0.1);
        for (int j = 1; j <= 2; ++j) {
            auto d = horizontal_derivative(f, g, j);
            CHECK(d.x.isApprox(Vector::Unit(3, j - 1), 1e-8));
        }
    }
    SUBCASE("dilation by 2 at the origin") {
        auto f = make_map("dilation:2", S);
        auto d = horizontal_derivative(f, Point::Zero(3), 1);
        CHECK(d.x.isApprox(Vector(2.0 * Vector::Unit(3, 0)), 1e-9));
    }
    SUBCASE("left translation is the identity on derivatives") {
        auto f = make_map("left_translate:0.3,-0.1,0.2", S);
        for (const Point& g : {Point(Point::Zero(3)), pt3(0.1, 0.2, -0.1)})
            for (int j = 1; j <= 2; ++j) {
                auto d = horizontal_derivative(f, g, j);
                CHECK(d.x.isApprox(Vector::Unit(3, j - 1), 1e-7));
            }
    }
    SUBCASE("undefined map") {
        auto f = make_map("identity", S);
        f.eval = [](const Point& p) {
            return Point(Point::Constant(3, std::nan("")));
        };
        CHECK_THROWS_AS(horizontal_derivative(f, Point::Zero(3), 1),
                        UndefinedAlongCurve);
    }
    SUBCASE("vertical part is rejected") {
        auto f = make_map("identity", S);
        f.eval = [](const Point& p) { return pt3(p[0], p[1], p[2] + 2.0 * p[0]); };
        CHECK_THROWS_AS(horizontal_derivative(f, Point::Zero(3), 1),
                        NotDifferentiable);
    }
}

TEST_CASE("curve_derivative") {
    auto S = builtin_space("heisenberg");

    SUBCASE("identity, k=3") {
        auto f = make_map("identity", S);
        auto d = curve_derivative(f, pt3(0.2, -0.1, 0.05), 3);
        CHECK(d.x.isApprox(Vector::Unit(3, 2), 1e-7));
    }
    SUBCASE("dilation by 2, k=3: degree-2 scaling") {
        auto f = make_map("dilation:2", S);
        auto d = curve_derivative(f, Point::Zero(3), 3);
        CHECK(d.x.isApprox(Vector(4.0 * Vector::Unit(3, 2)), 1e-8));
    }
    SUBCASE("product formula agrees at random base points") {
        auto f = make_map("left_translate:0.3,-0.1,0.2", S);
        std::mt19937_64 rng(41);
        std::uniform_real_distribution<double> unit(-0.4, 0.4);
        for (int s = 0; s < 20; ++s) {
            Point g = pt3(unit(rng), unit(rng), unit(rng));
            auto d = curve_derivative(f, g, 3);  // throws ProductMismatch on failure
            CHECK(d.x.isApprox(Vector::Unit(3, 2), 1e-6));
        }
    }
    SUBCASE("norm bound from the plan") {
        auto f = make_map("dilation:2", S);
        auto A = nilpotentize(S, Point::Zero(3));
        auto plan = fs_decompose(A, 3);
        auto At = nilpotentize(S, Point::Zero(3));
        auto d3 = curve_derivative(f, Point::Zero(3), 3);
        double hmax = 0.0;
        for (int j = 1; j <= 2; ++j)
            hmax = std::max(hmax,
                            hom_norm(At, horizontal_derivative(f, Point::Zero(3), j).x));
        double bound = plan.L * std::max(1.0, plan.coef_bound) *
                       std::pow(std::max(1.0, hmax), A.degrees[2]);
        CHECK(hom_norm(At, d3.x) <= bound);
    }
    SUBCASE("mismatching product is flagged") {
        auto f = make_map("identity", S);
        // kills the vertical coordinate: the commutator word collapses but the
        // horizontal derivatives do not
        f.eval = [](const Point& p) { return pt3(p[0], p[1], 0.0); };
        CHECK_THROWS_AS(curve_derivative(f, Point::Zero(3), 3), ProductMismatch);
    }
    SUBCASE("engel depth-3 curve") {
        auto E = builtin_space("engel");
        auto f = make_map("identity", E);
        auto d = curve_derivative(f, Point::Zero(4), 4);
        // the h^{-3} normalization of the depth-3 slot keeps ~1e-5 solve noise
        CHECK((d.x - Vector::Unit(4, 3)).lpNorm<Eigen::Infinity>() < 1e-3);
    }
}

TEST_CASE("assemble and apply the differential") {
    auto S = builtin_space("heisenberg");
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> unit(-0.3, 0.3);

    SUBCASE("identity differential is the identity") {
        auto f = make_map("identity", S);
        Point g = pt3(0.1, 0.2, -0.05);
        auto L = assemble_differential(f, g);
        for (int s = 0; s < 10; ++s) {
            Vector x = pt3(unit(rng), unit(rng), unit(rng));
            CHECK(apply_differential_coords(L, x).isApprox(x, 1e-6));
        }
        Point v = coords1_forward(S, g, pt3(0.1, -0.1, 0.02));
        CHECK((apply_differential(S, S, L, v) - v).lpNorm<Eigen::Infinity>() < 1e-7);
    }
    SUBCASE("dilation differential is the graded diagonal") {
        auto f = make_map("dilation:2", S);
        auto L = assemble_differential(f, Point::Zero(3));
        for (int s = 0; s < 10; ++s) {
            Vector x = pt3(unit(rng), unit(rng), unit(rng));
            Vector want = pt3(2 * x[0], 2 * x[1], 4 * x[2]);
            CHECK(apply_differential_coords(L, x).isApprox(want, 1e-8));
        }
    }
    SUBCASE("horizontal homomorphism equals its own differential") {
        auto f = make_map("swap_hom", S);
        auto L = assemble_differential(f, Point::Zero(3));
        for (int s = 0; s < 10; ++s) {
            Point v = pt3(unit(rng), unit(rng), unit(rng));
            CHECK((apply_differential(S, S, L, v) - f.eval(v))
                      .lpNorm<Eigen::Infinity>() < 1e-7);
        }
    }
}

TEST_CASE("verify_differential") {
    auto S = builtin_space("heisenberg");
    std::vector<double> eps_grid{0.2, 0.1, 0.05, 0.025};

    SUBCASE("exact homogeneous map has vanishing residuals") {
        auto f = make_map("dilation:2", S);
        auto L = assemble_differential(f, Point::Zero(3));
        auto check = verify_differential(f, L, eps_grid, 50, 47);
        for (const auto& [eps, r] : check.table.rows) CHECK(r < 1e-7);
        CHECK(check.skip_fraction == 0.0);
    }
    SUBCASE("perturbed dilation decays superlinearly") {
        auto f = make_map("perturbed_dilation", S);
        auto L = assemble_differential(f, Point::Zero(3));
        auto check = verify_differential(f, L, eps_grid, 50, 53);
        CHECK(check.table.slope > 1.0);
    }
    SUBCASE("undefined samples are skipped and reported") {
        auto f = make_map("identity", S);
        f.eval = [](const Point& p) {
            if (p[0] > 0.0) return Point(Point::Constant(3, std::nan("")));
            return p;
        };
        Point g = pt3(-0.5, 0.0, 0.0);
        auto L = assemble_differential(f, g);
        auto check = verify_differential(f, L, {0.05}, 100, 59);
        CHECK(check.skip_fraction == 0.0);
        auto wide = verify_differential(f, L, {0.8}, 100, 61);
        CHECK(wide.skip_fraction > 0.0);
    }
}

TEST_CASE("verify_homomorphism") {
    auto S = builtin_space("heisenberg");

    SUBCASE("identity and dilation") {
        for (const char* name : {"identity", "dilation:2"}) {
            auto f = make_map(name, S);
            auto L = assemble_differential(f, Point::Zero(3));
            auto rep = verify_homomorphism(L, 50, 67);
            CHECK(rep.hom_defect < 1e-9);
            CHECK(rep.dilation_defect < 1e-9);
            CHECK(rep.horizontality_ok);
        }
    }
    SUBCASE("corrupted differential fails loudly") {
        auto f = make_map("identity", S);
        auto L = assemble_differential(f, Point::Zero(3));
        L.per_coordinate[0].x[2] = 0.1;  // vertical leak in a horizontal slot
        auto rep = verify_homomorphism(L, 50, 71);
        CHECK(rep.hom_defect > 1e-3);
        CHECK_FALSE(rep.horizontality_ok);
    }
}

TEST_CASE("sr_jacobian") {
    auto S = builtin_space("heisenberg");

    SUBCASE("identity and dilation") {
        auto Li = assemble_differential(make_map("identity", S), Point::Zero(3));
        CHECK(sr_jacobian(Li) == doctest::Approx(1.0).epsilon(1e-9));
        auto Ld = assemble_differential(make_map("dilation:2", S), Point::Zero(3));
        CHECK(sr_jacobian(Ld) == doctest::Approx(16.0).epsilon(1e-9));
    }
    SUBCASE("rank deficiency gives zero") {
        auto L = assemble_differential(make_map("identity", S), Point::Zero(3));
        L.per_coordinate[0].x.setZero();
        CHECK(sr_jacobian(L) == 0.0);
    }
    SUBCASE("grading violations are rejected") {
        auto L = assemble_differential(make_map("identity", S), Point::Zero(3));
        L.per_coordinate[0].x[2] = 0.1;
        CHECK_THROWS_AS(sr_jacobian(L), GradingViolation);
    }
    SUBCASE("multiplicative on composed graded isomorphisms") {
        auto d2 = make_map("dilation:2", S);
        auto sw = make_map("swap_hom", S);
        MapUnderTest comp;
        comp.source = S;
        comp.target = S;
        comp.name = "composite";
        comp.eval = [&](const Point& p) { return d2.eval(sw.eval(p)); };
        double J1 = sr_jacobian(assemble_differential(sw, Point::Zero(3)));
        double J2 = sr_jacobian(assemble_differential(d2, Point::Zero(3)));
        double Jc = sr_jacobian(assemble_differential(comp, Point::Zero(3)));
        CHECK(Jc == doctest::Approx(J1 * J2).epsilon(1e-6));
    }
}

TEST_CASE("area_formula_check") {
    auto S = builtin_space("heisenberg");
    Region support{Point::Zero(3), Vector::Constant(3, 1.0)};
    auto set = graded_box(S, 0.9);

    SUBCASE("identity") {
        auto rep = area_formula_check(make_map("identity", S), support, set, 0.1,
                                      9, 73);
        CHECK(rep.lhs > 0.0);
        CHECK(rep.gap < 0.05);
    }
    SUBCASE("dilation scales both sides by 16") {
        auto id = area_formula_check(make_map("identity", S), support, set, 0.1,
                                     9, 73);
        auto rep = area_formula_check(make_map("dilation:2", S), support, set, 0.1,
                                      9, 79);
        CHECK(rep.gap < 0.05);
        CHECK(rep.rhs == doctest::Approx(16.0 * id.rhs).epsilon(0.05));
    }
    SUBCASE("left translation preserves the measure") {
        auto rep = area_formula_check(make_map("left_translate:0.2,-0.1,0.05", S),
                                      support, set, 0.1, 9, 83);
        CHECK(rep.gap < 0.05);
    }
    SUBCASE("folding map is caught") {
        MapUnderTest fold;
        fold.source = S;
        fold.target = S;
        fold.name = "fold";
        fold.eval = [](const Point& p) {
            return p[0] >= 0 ? p : pt3(-p[0], p[1], -p[2]);
        };
        fold.inverse = [](const Point& p) { return p; };
        CHECK_THROWS_AS(area_formula_check(fold, support,
                                           [](const Point&) { return true; }, 0.5,
                                           25, 89),
                        NonInjectiveDetected);
    }
}
