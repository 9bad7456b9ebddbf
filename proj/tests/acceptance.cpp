// Acceptance gate: one line per criterion, pinned tolerances, exit 0 iff all
// pass.  Run via ctest or directly.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cc/builtin.hpp"
#include "cc/diff.hpp"
#include "cc/experiments.hpp"
#include "cc/horizontal.hpp"
#include "cc/measure.hpp"
#include "cc/tangent_cone.hpp"

using namespace cc;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void criterion(int idx, const char* name, bool ok, const std::string& detail) {
    std::printf("%s  %2d  %s%s%s\n", ok ? "pass" : "FAIL", idx, name,
                detail.empty() ? "" : "  -- ", detail.c_str());
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::vector<Point> random_points(const CCStructure& S, int n, double half,
                                 std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Point> pts;
    for (int s = 0; s < n; ++s) {
        Point p(S.N);
        for (int i = 0; i < S.N; ++i) p[i] = unit(rng) * half;
        pts.push_back(p);
    }
    return pts;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void c1_validation() {
    auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    double worst = 0.0;
    for (const char* name : {"heisenberg", "engel"}) {
        auto S = builtin_space(name);
        auto rep = validate_filtration(S, random_points(S, 100, 1.0, 101));
        ok = ok && rep.all_ok;
        worst = std::max(worst, rep.max_grading_residual);
    }
    double el = seconds_since(t0);
    std::ostringstream d;
    d << "max residual " << worst << ", " << el << " s";
    criterion(1, "structure validation at 100 random points",
              ok && worst <= 1e-10 && el < 5.0, d.str());
}

void c2_commutator_oracle() {
    auto S = builtin_space("heisenberg");
    auto consts = structure_constants(S, Point::Zero(3));
    double forbidden = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                if ((i == 0 && j == 1 && k == 2) || (i == 1 && j == 0 && k == 2))
                    continue;
                forbidden = std::max(forbidden, std::abs(consts.at(i, j, k)));
            }
    bool ok = std::abs(consts.at(0, 1, 2) - 1.0) <= 1e-10 && forbidden <= 1e-10;
    criterion(2, "Heisenberg commutator oracle c_123 = 1", ok, "");
}

void c3_hausdorff() {
    bool ok = hausdorff_dimension(builtin_space("heisenberg")) == 4 &&
              hausdorff_dimension(builtin_space("engel")) == 7 &&
              hausdorff_dimension(builtin_space("abelian5")) == 5;
    criterion(3, "Hausdorff dimension 4 / 7 / N", ok, "");
}

void c4_quasimetric() {
    auto S = builtin_space("heisenberg");
    Region region{Point::Zero(3), Vector::Constant(3, 1.0)};
    auto est = metric_equivalence_report(S, region, 10000, 211);
    std::ostringstream d;
    d << "symmetry " << est.symmetry_defect << ", Q " << est.q_hat;
    criterion(4, "quasimetric axioms on 1e4 pairs",
              est.symmetry_defect <= 1e-8 && est.q_hat < 10.0, d.str());
}

void c5_equivalence() {
    bool ok = true;
    std::ostringstream d;
    for (const char* name :
         {"heisenberg", "engel", "abelian3", "heisenberg_perturbed"}) {
        auto S = builtin_space(name);
        Region region{Point::Zero(S.N), Vector::Constant(S.N, 1.0)};
        auto est = metric_equivalence_report(S, region, 10000, 223);
        ok = ok && est.c1_hat > 0.0 && est.c1_hat <= est.c2_hat &&
             std::isfinite(est.c2_hat) && est.sample_count > 0;
        d << name << " [" << est.c1_hat << ", " << est.c2_hat << "] ";
    }
    criterion(5, "metric equivalence constants on every builtin", ok, d.str());
}

void c6_nilpotent_rates() {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<double> grid{0.2, 0.1, 0.05, 0.025};

    auto P = builtin_space("heisenberg_perturbed");
    auto f_rates =
        rescaled_field_deviation(P, Point::Zero(3), grid,
                                 random_points(P, 20, 0.3, 227));
    auto m_rates = metrics_deviation_report(P, Point::Zero(3), grid, 100, 229);

    auto H = builtin_space("heisenberg");
    auto h_fields =
        rescaled_field_deviation(H, Point::Zero(3), grid,
                                 random_points(H, 20, 0.3, 233));
    auto h_metrics = metrics_deviation_report(H, Point::Zero(3), grid, 100, 239);
    double h_worst = 0.0;
    for (const auto& t : {h_fields, h_metrics})
        for (const auto& [e, v] : t.rows) h_worst = std::max(h_worst, v);

    double el = seconds_since(t0);
    std::ostringstream d;
    d << "perturbed slopes " << f_rates.slope << "/" << m_rates.slope
      << ", group dev " << h_worst << ", " << el << " s";
    criterion(6, "nilpotentization rates",
              f_rates.slope > 1.0 && m_rates.slope > 1.0 && h_worst <= 1e-6 &&
                  el < 60.0,
              d.str());
}

void c7_chow() {
    bool ok = true;
    std::ostringstream d;
    for (const char* name :
         {"heisenberg", "engel", "abelian3", "heisenberg_perturbed"}) {
        auto S = builtin_space(name);
        Point g = Point::Zero(S.N);
        std::mt19937_64 rng(241);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        double worst_res = 0.0, c2_hat = 0.0;
        for (int s = 0; s < 200; ++s) {
            Vector x(S.N);
            for (int i = 0; i < S.N; ++i)
                x[i] = unit(rng) * std::pow(0.05, S.degrees[i]);
            Point v = coords1_forward(S, g, x);
            try {
                auto sol = chow_solve(S, g, v);
                worst_res = std::max(
                    worst_res,
                    (replay_path(S, sol.path) - v).lpNorm<Eigen::Infinity>());
                c2_hat = std::max(c2_hat, sol.c2_ratio);
            } catch (const NoConvergence&) {
                ok = false;
            }
        }
        ok = ok && worst_res <= 1e-7 && std::isfinite(c2_hat);
        d << name << " c2 " << c2_hat << " ";
    }
    criterion(7, "Chow connectivity, 200 targets per space", ok, d.str());
}

void c8_cc_oracles() {
    auto S = builtin_space("heisenberg");
    Point g = Point::Zero(3);

    auto t0 = std::chrono::steady_clock::now();
    Point e1(3);
    e1 << 1, 0, 0;
    auto straight = cc_distance(S, g, e1);
    double el1 = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    Point vert(3);
    vert << 0, 0, 1;
    auto lifted = cc_distance(S, g, vert);
    double el2 = seconds_since(t0);

    double oracle = 2.0 * std::sqrt(M_PI);
    bool ok = std::abs(straight.upper - 1.0) <= 0.01 &&
              std::abs(lifted.upper - oracle) <= 0.02 * oracle && el1 < 120.0 &&
              el2 < 120.0;
    std::ostringstream d;
    d << "uppers " << straight.upper << " / " << lifted.upper << " (oracle "
      << oracle << "), " << el1 + el2 << " s";
    criterion(8, "cc-distance oracles", ok, d.str());
}

void c9_ballbox() {
    auto S = builtin_space("heisenberg");
    Region region{Point::Zero(3), Vector::Constant(3, 0.3)};
    CcOptions copts;
    copts.m = 16;
    copts.budget = 15;
    auto rep = ball_box_report(S, region, {0.08, 0.04}, 200, 251, copts);
    std::ostringstream d;
    d << "C1 " << rep.C1_hat << ", C2 " << rep.C2_hat << ", n "
      << rep.sample_count;
    criterion(9, "ball-box sandwich on 200 samples",
              rep.sample_count == 200 && rep.C1_hat > 0.0 &&
                  rep.C1_hat <= rep.C2_hat && rep.C2_hat < 20.0,
              d.str());
}

void c10_measure() {
    auto S = builtin_space("heisenberg");
    auto box = [&S](double r) {
        return Indicator([&S, r](const Point& p) {
            for (int i = 0; i < S.N; ++i)
                if (std::abs(p[i]) > std::pow(r, S.degrees[i])) return false;
            return true;
        });
    };
    Region big{Point::Zero(3), Vector::Constant(3, 4.0)};
    double unit_v = measure_estimate(S, box(1.0), big, {0.125}).value;
    double dil_v = measure_estimate(S, box(2.0), big, {0.125}).value;
    double ratio = dil_v / unit_v;

    Region dregion{Point::Zero(3), Vector::Constant(3, 0.2)};
    auto doubling = doubling_report(S, dregion, {0.1, 0.05}, 6, 257, 4000);

    std::ostringstream d;
    d << "homogeneity ratio " << ratio << ", doubling " << doubling.C_hat;
    criterion(10, "measure homogeneity and doubling vs 2^nu = 16",
              std::abs(ratio - 16.0) <= 1.6 &&
                  std::abs(doubling.C_hat - 16.0) <= 2.4,
              d.str());
}

void c11_differential() {
    auto S = builtin_space("heisenberg");
    std::vector<double> grid{0.2, 0.1, 0.05, 0.025};
    bool ok = true;
    std::ostringstream d;
    DifferentialMap for_corruption;
    for (const char* name :
         {"identity", "dilation:2", "swap_hom", "left_translate:0.3,-0.1,0.2"}) {
        auto f = make_map(name, S);
        auto L = assemble_differential(f, Point::Zero(3));
        if (std::string(name) == "identity") for_corruption = L;
        auto check = verify_differential(f, L, grid, 50, 263);
        double worst = 0.0;
        for (const auto& [e, r] : check.table.rows) worst = std::max(worst, r);
        auto hom = verify_homomorphism(L, 50, 269);
        bool this_ok = (worst <= 1e-7 || check.table.slope > 1.0) &&
                       hom.hom_defect <= 1e-6 && hom.dilation_defect <= 1e-6 &&
                       hom.horizontality_ok;
        ok = ok && this_ok;
        if (!this_ok) d << name << " failed ";
    }
    for_corruption.per_coordinate[0].x[2] = 0.1;
    auto bad = verify_homomorphism(for_corruption, 50, 271);
    ok = ok && bad.hom_defect > 1e-3;
    d << "negative control defect " << bad.hom_defect;
    criterion(11, "differential assembly and homomorphism checks", ok, d.str());
}

void c12_product_formula() {
    auto S = builtin_space("heisenberg");
    auto A0 = nilpotentize(S, Point::Zero(3));
    bool ok = true;
    int mismatches = 0;
    for (const char* name : {"identity", "left_translate:0.3,-0.1,0.2"}) {
        auto f = make_map(name, S);
        std::mt19937_64 rng(277);
        std::uniform_real_distribution<double> unit(-0.4, 0.4);
        for (int s = 0; s < 100; ++s) {
            Point g(3);
            for (int i = 0; i < 3; ++i) g[i] = unit(rng);
            try {
                // cross-checks direct fit vs product internally at 1e-5
                auto dk = curve_derivative(f, g, 3);
                auto At = nilpotentize(S, f.eval(g));
                auto plan = fs_decompose(nilpotentize(S, g), 3);
                double hmax = 0.0;
                for (int j = 1; j <= 2; ++j)
                    hmax = std::max(
                        hmax, hom_norm(At, horizontal_derivative(f, g, j).x));
                double bound = plan.L * std::max(1.0, plan.coef_bound) *
                               std::pow(std::max(1.0, hmax), S.degrees[2]);
                if (hom_norm(At, dk.x) > bound) ok = false;
            } catch (const ProductMismatch&) {
                ++mismatches;
            }
        }
    }
    std::ostringstream d;
    d << mismatches << " mismatches at 200 base points";
    criterion(12, "curve-derivative product formula and norm bound",
              ok && mismatches == 0, d.str());
}

void c13_jacobian_area() {
    auto t0 = std::chrono::steady_clock::now();
    auto S = builtin_space("heisenberg");
    auto L = assemble_differential(make_map("dilation:2", S), Point::Zero(3));
    double J = sr_jacobian(L);

    Region support{Point::Zero(3), Vector::Constant(3, 1.0)};
    Indicator set = [&S](const Point& p) {
        for (int i = 0; i < S.N; ++i)
            if (std::abs(p[i]) > std::pow(0.9, S.degrees[i])) return false;
        return true;
    };
    auto a1 = area_formula_check(make_map("dilation:2", S), support, set, 0.1, 9,
                                 281);
    auto a2 = area_formula_check(make_map("left_translate:0.2,-0.1,0.05", S),
                                 support, set, 0.1, 9, 283);
    double el = seconds_since(t0);
    std::ostringstream d;
    d << "J " << J << ", gaps " << a1.gap << " / " << a2.gap << ", " << el
      << " s";
    criterion(13, "sub-Riemannian Jacobian and area formula",
              std::abs(J - 16.0) <= 1e-9 && a1.gap < 0.05 && a2.gap < 0.05 &&
                  el < 120.0,
              d.str());
}

void c14_determinism() {
    auto base = fs::temp_directory_path() / "cc_calc_acceptance";
    fs::remove_all(base);
    bool ok = true;
    for (const char* exp : {"metrics", "chow"}) {
        ExperimentConfig cfg;
        cfg.space = "heisenberg";
        cfg.experiment = exp;
        cfg.seed = 33;
        cfg.samples = 100;
        cfg.output_dir = (base / (std::string(exp) + "_a")).string();
        auto r1 = run_experiment(cfg);
        cfg.output_dir = (base / (std::string(exp) + "_b")).string();
        auto r2 = run_experiment(cfg);
        ok = ok && r1.exit_code == 0 && r2.exit_code == 0 &&
             r1.files_written.size() == r2.files_written.size();
        for (size_t i = 0; ok && i < r1.files_written.size(); ++i)
            ok = slurp(r1.files_written[i]) == slurp(r2.files_written[i]);
    }
    fs::remove_all(base);
    criterion(14, "determinism: byte-identical CSV reruns", ok, "");
}

}  // namespace

int main() {
    c1_validation();
    c2_commutator_oracle();
    c3_hausdorff();
    c4_quasimetric();
    c5_equivalence();
    c6_nilpotent_rates();
    c7_chow();
    c8_cc_oracles();
    c9_ballbox();
    c10_measure();
    c11_differential();
    c12_product_formula();
    c13_jacobian_area();
    c14_determinism();
    std::printf("%s (%d/14)\n", failures == 0 ? "ALL CRITERIA PASS" : "FAILURES",
                14 - failures);
    return failures == 0 ? 0 : 1;
}
