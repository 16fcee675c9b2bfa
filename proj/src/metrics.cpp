#include "utc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "utc/data.hpp"
#include "utc/error.hpp"

namespace utc {

namespace {

// Relabels to 0..n-1 in increasing order of the original ids.
std::vector<int> compress(const std::vector<int>& v, std::vector<int>* ids = nullptr) {
    std::vector<int> u = v;
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    std::vector<int> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = static_cast<int>(std::lower_bound(u.begin(), u.end(), v[i]) - u.begin());
    if (ids) *ids = u;
    return out;
}

struct Contingency {
    std::vector<std::vector<double>> n;  // clusters x classes
    std::vector<double> rows, cols;
    double total = 0.0;
};

Contingency contingency(const std::vector<int>& p, const std::vector<int>& t) {
    std::vector<int> pc = compress(p), tc = compress(t);
    int kp = pc.empty() ? 0 : *std::max_element(pc.begin(), pc.end()) + 1;
    int kt = tc.empty() ? 0 : *std::max_element(tc.begin(), tc.end()) + 1;
    Contingency c;
    c.n.assign(kp, std::vector<double>(kt, 0.0));
    c.rows.assign(kp, 0.0);
    c.cols.assign(kt, 0.0);
    for (std::size_t i = 0; i < pc.size(); ++i) {
        c.n[pc[i]][tc[i]] += 1.0;
        c.rows[pc[i]] += 1.0;
        c.cols[tc[i]] += 1.0;
    }
    c.total = static_cast<double>(pc.size());
    return c;
}

double choose2(double x) { return 0.5 * x * (x - 1.0); }

double entropy(const std::vector<double>& counts, double total) {
    double h = 0.0;
    for (double c : counts)
        if (c > 0.0) h -= (c / total) * std::log(c / total);
    return h;
}

}  // namespace

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weight) {
    const int r = static_cast<int>(weight.size());
    const int c = r ? static_cast<int>(weight[0].size()) : 0;
    const int n = std::max(r, c);
    if (n == 0) return {};
    double wmax = 0.0;
    for (const auto& row : weight)
        for (double w : row) wmax = std::max(wmax, w);
    // Square min-cost form, 1-based potentials.
    auto cost = [&](int i, int j) {
        double w = (i < r && j < c) ? weight[i][j] : 0.0;
        return wmax - w;
    };
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> out(r, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] - 1 < r && j - 1 < c) out[p[j] - 1] = j - 1;
    return out;
}

std::vector<int> match_labels(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw ArgumentError("match_labels: length mismatch");
    if (pred.empty()) return {};
    for (int x : pred)
        if (x < 0) throw ArgumentError("match_labels: negative cluster id");
    int kp = *std::max_element(pred.begin(), pred.end()) + 1;
    std::vector<int> ids;
    std::vector<int> tc = compress(truth, &ids);
    int kt = static_cast<int>(ids.size());
    std::vector<std::vector<double>> w(kp, std::vector<double>(kt, 0.0));
    for (std::size_t i = 0; i < pred.size(); ++i) w[pred[i]][tc[i]] += 1.0;
    std::vector<int> a = max_weight_assignment(w);
    for (int& x : a)
        if (x >= 0) x = ids[x];
    return a;
}

MetricsReport evaluate(const std::vector<int>& pred, const std::vector<int>& truth) {
    if (pred.size() != truth.size()) throw ArgumentError("evaluate: length mismatch");
    if (truth.empty()) throw ArgumentError("evaluate: no samples");
    MetricsReport r;
    const Contingency c = contingency(pred, truth);
    const double m = c.total;

    std::vector<int> pc = compress(pred);
    std::vector<int> map = match_labels(pc, truth);
    double matched = 0.0;
    for (std::size_t i = 0; i < pc.size(); ++i)
        if (map[pc[i]] == truth[i]) matched += 1.0;
    r.acc = matched / m;

    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& row : c.n)
        for (double x : row) sum_ij += choose2(x);
    for (double a : c.rows) sum_a += choose2(a);
    for (double b : c.cols) sum_b += choose2(b);
    const double pairs = choose2(m);
    const double expected = pairs > 0.0 ? sum_a * sum_b / pairs : 0.0;
    const double max_index = 0.5 * (sum_a + sum_b);
    r.ari = max_index == expected ? 1.0 : (sum_ij - expected) / (max_index - expected);

    const double precision = sum_a > 0.0 ? sum_ij / sum_a : 1.0;
    const double recall = sum_b > 0.0 ? sum_ij / sum_b : 1.0;
    r.f_score = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;

    const double hp = entropy(c.rows, m), ht = entropy(c.cols, m);
    double mi = 0.0;
    for (std::size_t i = 0; i < c.n.size(); ++i)
        for (std::size_t j = 0; j < c.cols.size(); ++j) {
            double x = c.n[i][j];
            if (x > 0.0) mi += (x / m) * std::log(x * m / (c.rows[i] * c.cols[j]));
        }
    const double hmean = 0.5 * (hp + ht);
    r.nmi = hmean > 0.0 ? std::clamp(mi / hmean, 0.0, 1.0) : 1.0;

    double pure = 0.0;
    for (const auto& row : c.n) pure += *std::max_element(row.begin(), row.end());
    r.purity = pure / m;
    return r;
}

std::string MetricsReport::to_record() const {
    std::ostringstream os;
    os << "acc=" << format_real(acc) << '\n'
       << "ari=" << format_real(ari) << '\n'
       << "f_score=" << format_real(f_score) << '\n'
       << "nmi=" << format_real(nmi) << '\n'
       << "purity=" << format_real(purity) << '\n';
    return os.str();
}

}  // namespace utc
