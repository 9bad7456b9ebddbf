#include "cc/structure.hpp"

#include <json.hpp>

#include <cmath>

namespace cc {

namespace {

std::vector<int> degrees_from_filtration(const std::vector<int>& dims) {
    std::vector<int> degrees;
    int prev = 0;
    for (size_t m = 0; m < dims.size(); ++m) {
        for (int k = prev; k < dims[m]; ++k) degrees.push_back(static_cast<int>(m) + 1);
        prev = dims[m];
    }
    return degrees;
}

double condition_number(const Matrix& A) {
    Eigen::JacobiSVD<Matrix> svd(A);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

}  // namespace

CCStructure load_structure(const std::string& config_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config is not valid JSON: ") + e.what());
    }

    CCStructure S;
    try {
        S.N = j.at("dimension").get<int>();
        S.filtration_dims = j.at("filtration").get<std::vector<int>>();
        S.chart_radius = j.value("chart_radius", 1.0);
        const auto& fields = j.at("fields");
        if (static_cast<int>(fields.size()) != S.N)
            throw ParseError("expected " + std::to_string(S.N) + " fields");
        for (const auto& f : fields) {
            PolyField pf;
            if (static_cast<int>(f.size()) != S.N)
                throw ParseError("each field needs " + std::to_string(S.N) + " components");
            for (const auto& comp : f)
                pf.components.push_back(Polynomial::parse(comp.get<std::string>(), S.N));
            S.fields.push_back(std::move(pf));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("config schema mismatch: ") + e.what());
    }

    if (S.filtration_dims.empty() || S.filtration_dims.back() != S.N)
        throw InvalidFiltration("filtration must end at h_M = N");
    for (size_t i = 1; i < S.filtration_dims.size(); ++i) {
        if (S.filtration_dims[i] <= S.filtration_dims[i - 1])
            throw InvalidFiltration("filtration dims must be strictly increasing");
    }
    if (S.filtration_dims.front() <= 0)
        throw InvalidFiltration("h_1 must be positive");
    if (S.chart_radius <= 0.0) throw ParseError("chart_radius must be positive");

    S.M = static_cast<int>(S.filtration_dims.size());
    S.degrees = degrees_from_filtration(S.filtration_dims);

    // Frame condition at the chart origin.
    Point origin = Point::Zero(S.N);
    frame_at(S, origin);
    return S;
}

Matrix frame_at(const CCStructure& S, const Point& p) {
    if (!S.in_chart(p)) throw ChartExit("point outside chart box");
    Matrix F(S.N, S.N);
    for (int k = 0; k < S.N; ++k) F.col(k) = S.fields[k].eval(p);
    if (condition_number(F) > tol::frame_condition)
        throw DegenerateFrame("frame condition number exceeds bound");
    return F;
}

TangentVector lie_bracket(const CCStructure& S, int i, int j, const Point& p) {
    if (i < 1 || i > S.N || j < 1 || j > S.N)
        throw Error("field index out of range");
    if (!S.in_chart(p)) throw ChartExit("point outside chart box");
    PolyField br = lie_bracket_field(S.fields[i - 1], S.fields[j - 1]);
    return TangentVector{br.eval(p)};
}

StructConsts structure_constants(const CCStructure& S, const Point& p) {
    Matrix F = frame_at(S, p);
    auto solver = F.partialPivLu();

    StructConsts out;
    out.base = p;
    out.c.assign(S.N, Matrix::Zero(S.N, S.N));
    for (int i = 0; i < S.N; ++i) {
        for (int j = i + 1; j < S.N; ++j) {
            Vector b = lie_bracket(S, i + 1, j + 1, p).components;
            Vector coeffs = solver.solve(b);
            if ((F * coeffs - b).lpNorm<Eigen::Infinity>() > tol::solve_residual)
                throw DegenerateFrame("structure-constant solve residual too large");
            for (int k = 0; k < S.N; ++k) {
                out.c[i](j, k) = coeffs[k];
                out.c[j](i, k) = -coeffs[k];
                if (S.degrees[k] > S.degrees[i] + S.degrees[j] &&
                    std::abs(coeffs[k]) > tol::grading) {
                    throw GradingViolation(
                        "commutator table violates the declared filtration grading");
                }
            }
        }
    }
    return out;
}

ValidationReport validate_filtration(const CCStructure& S,
                                     const std::vector<Point>& sample_points) {
    ValidationReport report;
    for (const Point& p : sample_points) {
        PointReport pr;
        pr.p = p;

        Matrix F(S.N, S.N);
        for (int k = 0; k < S.N; ++k) F.col(k) = S.fields[k].eval(p);
        pr.frame_condition = condition_number(F);
        pr.frame_ok = pr.frame_condition <= tol::frame_condition;

        // Grading residual over forbidden triples (uses raw linear solves so
        // that failures are reported rather than thrown).
        if (pr.frame_ok) {
            auto solver = F.partialPivLu();
            for (int i = 0; i < S.N; ++i) {
                for (int j = i + 1; j < S.N; ++j) {
                    Vector b = lie_bracket(S, i + 1, j + 1, p).components;
                    Vector coeffs = solver.solve(b);
                    for (int k = 0; k < S.N; ++k) {
                        if (S.degrees[k] > S.degrees[i] + S.degrees[j])
                            pr.grading_residual =
                                std::max(pr.grading_residual, std::abs(coeffs[k]));
                    }
                }
            }

            // Condition (2): brackets [H_i, H_{j+1-i}] together with H_j span
            // H_{j+1}, as a rank test on the stacked vectors.
            for (int layer = 1; layer < S.M && pr.surjectivity_ok; ++layer) {
                int h_next = S.filtration_dims[layer];
                int h_cur = S.filtration_dims[layer - 1];
                std::vector<Vector> span_vecs;
                for (int k = 0; k < h_cur; ++k) span_vecs.push_back(F.col(k));
                int half = (layer + 2) / 2;  // k = floor((j+1)/2) with j = layer
                for (int i_layer = 1; i_layer <= half; ++i_layer) {
                    int j_layer = layer + 1 - i_layer;
                    if (j_layer < 1 || j_layer > S.M) continue;
                    int ha = S.filtration_dims[i_layer - 1];
                    int hb = S.filtration_dims[j_layer - 1];
                    for (int a = 1; a <= ha; ++a)
                        for (int b = 1; b <= hb; ++b)
                            span_vecs.push_back(lie_bracket(S, a, b, p).components);
                }
                Matrix stacked(S.N, static_cast<int>(span_vecs.size()));
                for (size_t c = 0; c < span_vecs.size(); ++c)
                    stacked.col(static_cast<int>(c)) = span_vecs[c];
                Eigen::JacobiSVD<Matrix> svd(stacked);
                double smax = svd.singularValues().maxCoeff();
                int rank = 0;
                for (int s = 0; s < svd.singularValues().size(); ++s)
                    if (svd.singularValues()[s] > 1e-9 * std::max(1.0, smax)) ++rank;
                if (rank < h_next) pr.surjectivity_ok = false;
            }
        } else {
            pr.surjectivity_ok = false;
        }

        report.max_grading_residual =
            std::max(report.max_grading_residual, pr.grading_residual);
        report.max_condition = std::max(report.max_condition, pr.frame_condition);
        if (!pr.frame_ok || !pr.surjectivity_ok || pr.grading_residual > tol::grading)
            report.all_ok = false;
        report.points.push_back(std::move(pr));
    }
    return report;
}

}  // namespace cc
