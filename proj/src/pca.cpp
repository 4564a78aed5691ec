#include <measp/bench.hpp>

#include <cmath>
#include <stdexcept>

namespace measp {

namespace {

using Matrix = std::vector<std::vector<double>>;

std::vector<double> mul(const Matrix& c, const std::vector<double>& v) {
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t i = 0; i != v.size(); ++i)
        for (std::size_t j = 0; j != v.size(); ++j) out[i] += c[i][j] * v[j];
    return out;
}

double norm(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void orient(std::vector<double>& v) {
    std::size_t big = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[big])) big = i;
    if (!v.empty() && v[big] < 0)
        for (double& x : v) x = -x;
}

// Dominant eigenpair of a symmetric positive semidefinite matrix.
std::pair<double, std::vector<double>> power_iteration(const Matrix& c, double tol) {
    const std::size_t n = c.size();
    std::vector<double> v(n);
    for (std::size_t i = 0; i != n; ++i) v[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
    double nv = norm(v);
    for (double& x : v) x /= nv;
    for (int it = 0; it != 200000; ++it) {
        auto w  = mul(c, v);
        double nw = norm(w);
        if (nw < 1e-300) return {0.0, v};
        for (double& x : w) x /= nw;
        orient(w);
        double diff = 0;
        for (std::size_t i = 0; i != n; ++i) diff = std::max(diff, std::abs(w[i] - v[i]));
        v = std::move(w);
        if (diff < tol) break;
    }
    auto cv      = mul(c, v);
    double lambda = 0;
    for (std::size_t i = 0; i != n; ++i) lambda += v[i] * cv[i];
    return {std::max(lambda, 0.0), v};
}

} // namespace

PcaResult pca_project(std::span<const std::vector<double>> rows, double tolerance) {
    if (rows.size() < 3) throw std::invalid_argument("PCA needs at least 3 vectors");
    const std::size_t n = rows.size(), d = rows.front().size();
    if (d == 0) throw std::invalid_argument("PCA needs at least one dimension");
    for (const auto& r : rows)
        if (r.size() != d) throw std::invalid_argument("PCA rows differ in length");

    std::vector<double> mean(d, 0.0), sd(d, 0.0);
    for (const auto& r : rows)
        for (std::size_t j = 0; j != d; ++j) mean[j] += r[j];
    for (double& m : mean) m /= static_cast<double>(n);
    for (const auto& r : rows)
        for (std::size_t j = 0; j != d; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
    for (std::size_t j = 0; j != d; ++j) sd[j] = std::sqrt(sd[j] / static_cast<double>(n));

    Matrix z(n, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i != n; ++i)
        for (std::size_t j = 0; j != d; ++j)
            if (sd[j] > 1e-12 * std::max(1.0, std::abs(mean[j]))) z[i][j] = (rows[i][j] - mean[j]) / sd[j];

    Matrix cov(d, std::vector<double>(d, 0.0));
    for (const auto& r : z)
        for (std::size_t a = 0; a != d; ++a) {
            if (r[a] == 0) continue;
            for (std::size_t b = 0; b != d; ++b) cov[a][b] += r[a] * r[b];
        }
    PcaResult out;
    for (std::size_t a = 0; a != d; ++a) {
        for (std::size_t b = 0; b != d; ++b) cov[a][b] /= static_cast<double>(n);
        out.total_variance += cov[a][a];
    }

    for (int k = 0; k != 2; ++k) {
        auto [lambda, v] = power_iteration(cov, tolerance);
        out.explained[k]  = lambda;
        for (std::size_t a = 0; a != d; ++a)
            for (std::size_t b = 0; b != d; ++b) cov[a][b] -= lambda * v[a] * v[b];
        out.components[k] = std::move(v);
    }
    for (const auto& r : z) {
        std::array<double, 2> c{};
        for (int k = 0; k != 2; ++k)
            for (std::size_t j = 0; j != d; ++j) c[k] += r[j] * out.components[k][j];
        out.coords.push_back(c);
    }
    return out;
}

PcaResult pca_project(std::span<const FeatureVector> rows, double tolerance) {
    std::vector<std::vector<double>> x;
    x.reserve(rows.size());
    for (const auto& r : rows) {
        if (!x.empty() && r.manifest_version != rows.front().manifest_version)
            throw VersionMismatch("PCA input mixes feature manifests");
        x.push_back(r.values);
    }
    return pca_project(std::span<const std::vector<double>>(x), tolerance);
}

} // namespace measp
