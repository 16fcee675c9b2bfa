#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "metrics_oracle.hpp"
#include "utc/error.hpp"
#include "utc/metrics.hpp"

using namespace utc;

namespace {

std::vector<int> random_labels(std::size_t m, int k, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> u(0, k - 1);
    std::vector<int> a(m);
    for (auto& v : a) v = u(rng);
    return a;
}

void check_close(const MetricsReport& got, const MetricsReport& want, double tol) {
    CHECK(std::abs(got.acc - want.acc) <= tol);
    CHECK(std::abs(got.ari - want.ari) <= tol);
    CHECK(std::abs(got.f_score - want.f_score) <= tol);
    CHECK(std::abs(got.nmi - want.nmi) <= tol);
    CHECK(std::abs(got.purity - want.purity) <= tol);
}

}  // namespace

TEST_CASE("match_labels") {
    SUBCASE("identity") {
        std::vector<int> t{0, 1, 2, 1, 0};
        CHECK(match_labels(t, t) == std::vector<int>{0, 1, 2});
    }
    SUBCASE("swapped labels") {
        std::vector<int> t{0, 0, 1, 1, 1}, p{1, 1, 0, 0, 0};
        CHECK(match_labels(p, t) == std::vector<int>{1, 0});
    }
    SUBCASE("exhaustive permutation oracle") {
        std::mt19937_64 rng(1);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<int> p = random_labels(10, 3, rng), t = random_labels(10, 3, rng);
            std::vector<int> map = match_labels(p, t);
            long got = 0;
            for (std::size_t i = 0; i < p.size(); ++i)
                if (p[i] < static_cast<int>(map.size()) && map[p[i]] == t[i]) ++got;
            std::vector<int> perm{0, 1, 2};
            long best = 0;
            do {
                long n = 0;
                for (std::size_t i = 0; i < p.size(); ++i) n += perm[p[i]] == t[i];
                best = std::max(best, n);
            } while (std::next_permutation(perm.begin(), perm.end()));
            CHECK(got == best);
        }
    }
    SUBCASE("more clusters than classes") {
        std::vector<int> p{0, 1, 2, 2}, t{0, 0, 1, 1};
        std::vector<int> map = match_labels(p, t);
        CHECK(map[2] == 1);
        CHECK(std::count(map.begin(), map.end(), -1) == 1);
    }
}

TEST_CASE("max_weight_assignment") {
    std::vector<std::vector<double>> w{{1, 5, 3}, {4, 2, 6}};
    CHECK(max_weight_assignment(w) == std::vector<int>{1, 2});
    std::vector<std::vector<double>> tall{{3}, {7}, {1}};
    CHECK(max_weight_assignment(tall) == std::vector<int>{-1, 0, -1});
}

TEST_CASE("evaluate") {
    SUBCASE("perfect agreement") {
        std::vector<int> t{0, 1, 1, 2, 0, 2};
        check_close(evaluate(t, t), MetricsReport{1, 1, 1, 1, 1}, 0.0);
        std::vector<int> relabeled{2, 0, 0, 1, 2, 1};
        check_close(evaluate(relabeled, t), MetricsReport{1, 1, 1, 1, 1}, 1e-15);
    }
    SUBCASE("single cluster against balanced truth") {
        MetricsReport r = evaluate({0, 0, 0, 0}, {0, 0, 1, 1});
        CHECK(r.purity == 0.5);
        CHECK(r.acc == 0.5);
        CHECK(r.ari == 0.0);
        CHECK(r.nmi == 0.0);
        // Precision 2/6, recall 1.
        CHECK(r.f_score == doctest::Approx(0.5));
    }
    SUBCASE("definitional oracle") {
        std::mt19937_64 rng(2);
        for (int trial = 0; trial < 30; ++trial) {
            std::size_t m = 2 + trial % 11;
            int kp = 1 + trial % 4, kt = 1 + (trial / 4) % 4;
            std::vector<int> p = random_labels(m, kp, rng), t = random_labels(m, kt, rng);
            check_close(evaluate(p, t), testutil::oracle_evaluate(p, t), 1e-12);
        }
    }
    SUBCASE("bounds and label-permutation invariance") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 30; ++trial) {
            const int k = 2 + trial % 3;
            std::vector<int> t = random_labels(15, k, rng), p = random_labels(15, k, rng);
            MetricsReport r = evaluate(p, t);
            int classes = static_cast<int>(testutil::distinct(t).size());
            CHECK(r.acc >= 1.0 / classes - 1e-15);
            CHECK(r.purity >= 1.0 / classes - 1e-15);
            for (double v : {r.acc, r.f_score, r.nmi, r.purity}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            CHECK(r.ari >= -1.0);
            CHECK(r.ari <= 1.0);
            std::vector<int> shift(p);
            for (int& v : shift) v = (v + 1) % k;
            check_close(evaluate(shift, t), r, 1e-15);
        }
    }
    SUBCASE("ARI is chance corrected") {
        std::vector<int> t(60);
        for (int i = 0; i < 60; ++i) t[i] = i % 3;
        double mean = 0.0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            std::vector<int> p = t;
            std::mt19937_64 rng(seed);
            std::shuffle(p.begin(), p.end(), rng);
            mean += evaluate(p, t).ari / 100.0;
        }
        CHECK(std::abs(mean) < 0.1);
    }
    SUBCASE("record format") {
        MetricsReport r{1.0, 0.5, 0.25, 0.125, 1.0};
        CHECK(r.to_record() == "acc=1\nari=0.5\nf_score=0.25\nnmi=0.125\npurity=1\n");
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(evaluate({0, 1}, {0}), ArgumentError);
        CHECK_THROWS_AS(evaluate({}, {}), ArgumentError);
    }
}
