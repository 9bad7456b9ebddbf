#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cc/builtin.hpp"
#include "cc/flows.hpp"

using namespace cc;

namespace {

Point pt3(double a, double b, double c) {
    Point p(3);
    p << a, b, c;
    return p;
}

Vector rand_small(int dim, double box, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-box, box);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v[i] = u(rng);
    return v;
}

}  // namespace

TEST_CASE("flow") {
    auto S = builtin_space("heisenberg");
    Point o = pt3(0, 0, 0);

    Point u = flow(S, o, Vector::Unit(3, 0), 1.0);
    CHECK((u - pt3(1, 0, 0)).norm() <= 1e-12);

    Point same = flow(S, pt3(0.3, -0.2, 0.1), Vector::Unit(3, 1), 0.0);
    CHECK((same - pt3(0.3, -0.2, 0.1)).norm() == 0.0);

    Point w = flow(S, pt3(1, 0, 0), Vector::Unit(3, 1), 1.0);
    CHECK((w - pt3(1, 1, 0.5)).norm() <= 1e-12);
}

TEST_CASE("flow group law") {
    auto S = builtin_space("heisenberg_perturbed");
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Point p = rand_small(3, 0.3, rng);
        Vector c = rand_small(3, 0.5, rng);
        std::uniform_real_distribution<double> u(-0.5, 0.5);
        double s = u(rng), t = u(rng);
        Point two_step = flow(S, flow(S, p, c, s), c, t);
        Point one_step = flow(S, p, c, s + t);
        CHECK((two_step - one_step).lpNorm<Eigen::Infinity>() <= 1e-8);
    }
}

TEST_CASE("RK4 order on the perturbed space") {
    auto S = builtin_space("heisenberg_perturbed");
    Point p = pt3(0.2, -0.1, 0.05);
    Vector c(3);
    c << 0.7, -0.4, 0.3;

    FlowOptions fine;
    fine.h_max = 1e-4;
    Point ref = flow(S, p, c, 1.0, fine);

    FlowOptions coarse;
    coarse.h_max = 0.04;
    double e1 = (flow(S, p, c, 1.0, coarse) - ref).norm();
    coarse.h_max = 0.02;
    double e2 = (flow(S, p, c, 1.0, coarse) - ref).norm();
    CHECK(e1 / e2 > 10.0);  // order 4 gives ~16x
    CHECK(e1 / e2 < 24.0);
}

TEST_CASE("coords1 forward/inverse") {
    auto S = builtin_space("heisenberg");
    Point g = pt3(0, 0, 0);

    auto trivial = coords1_inverse(S, g, g);
    CHECK(trivial.x.norm() <= 1e-9);

    Point u = pt3(1, 1, 0.5);
    auto c = coords1_inverse(S, g, u);
    CHECK((coords1_forward(S, g, c.x) - u).norm() <= 1e-9);

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        Vector x = rand_small(3, 0.4, rng);
        Point v = coords1_forward(S, g, x);
        auto back = coords1_inverse(S, g, v);
        CHECK((back.x - x).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
}

TEST_CASE("coords2 forward/inverse") {
    auto S = builtin_space("heisenberg");
    Point g = pt3(0, 0, 0);

    CHECK((coords2_forward(S, g, Vector::Zero(3)) - g).norm() == 0.0);

    Vector a(3);
    a << 1, 1, 0;
    CHECK((coords2_forward(S, g, a) - pt3(1, 1, 0.5)).norm() <= 1e-12);

    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 50; ++trial) {
        Vector a0 = rand_small(3, 0.4, rng);
        Point v = coords2_forward(S, g, a0);
        auto back = coords2_inverse(S, g, v);
        CHECK((coords2_forward(S, g, back.a) - v).norm() <= 1e-9);
    }
}

TEST_CASE("d_infty") {
    auto S = builtin_space("heisenberg");
    Point g = pt3(0, 0, 0);

    CHECK(d_infty(S, g, g) == doctest::Approx(0.0));
    CHECK(d_infty(S, g, pt3(0, 0, 0.25)) == doctest::Approx(0.5).epsilon(1e-9));

    // symmetry (quasimetric property)
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        Point u = rand_small(3, 0.4, rng), v = rand_small(3, 0.4, rng);
        CHECK(std::abs(d_infty(S, u, v) - d_infty(S, v, u)) <= 1e-8);
    }
}

TEST_CASE("d_2 and d_rho") {
    auto S = builtin_space("heisenberg");
    Point g = pt3(0, 0, 0);
    CHECK(d_2(S, g, g) == doctest::Approx(0.0));
    CHECK(d_2(S, g, pt3(0, 0, 0.25)) == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(d_rho(S, g, g) == doctest::Approx(0.0));
    // y = (3,4,0) scaled into the chart: first-layer Euclidean norm.
    Point u = coords1_forward(S, g, pt3(0.3, 0.4, 0));
    CHECK(d_rho(S, g, u) == doctest::Approx(0.5).epsilon(1e-8));

    // d_rho/d_infty bounded on first-layer points
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        Vector x = rand_small(3, 0.4, rng);
        x[2] = 0.0;
        Point v = coords1_forward(S, g, x);
        double r = d_rho(S, g, v) / d_infty(S, g, v);
        CHECK(r >= 1.0 - 1e-9);
        CHECK(r <= std::sqrt(2.0 * 2.0) + 1e-9);  // sqrt(dim H1 * M)
    }
}

TEST_CASE("metric_equivalence_report") {
    FlowOptions opts;

    SUBCASE("abelian: both coordinate systems coincide") {
        auto S = builtin_space("abelian3");
        Region region{Point::Zero(3), Vector::Constant(3, 0.8)};
        auto est = metric_equivalence_report(S, region, 200, 5, opts);
        CHECK(est.c1_hat == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(est.c2_hat == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(est.q_hat == doctest::Approx(1.0).epsilon(1e-8));
    }
    SUBCASE("Heisenberg box: sandwich constants finite, c1 > 0.1") {
        auto S = builtin_space("heisenberg");
        Region region{Point::Zero(3), Vector::Constant(3, 0.5)};
        auto est = metric_equivalence_report(S, region, 300, 7, opts);
        CHECK(est.sample_count > 250);
        CHECK(est.c1_hat > 0.1);
        CHECK(est.c2_hat >= est.c1_hat);
        CHECK(std::isfinite(est.c2_hat));
        CHECK(est.q_hat >= 1.0);
        CHECK(est.symmetry_defect <= 1e-8);
    }
}
