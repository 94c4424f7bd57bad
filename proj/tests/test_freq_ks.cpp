#include "equivcheck/error.hpp"
#include "equivcheck/freq_ks.hpp"
#include "equivcheck/rng.hpp"
#include "support/oracles.hpp"
#include "support/scipy_oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace equivcheck;

namespace {

void check_against_scipy(const std::vector<double>& a, const std::vector<double>& b, double d, double p) {
    const auto r = two_sample_ks(WeightedSample::unit(a), WeightedSample::unit(b));
    EXPECT_NEAR(r.d, d, 1e-12);
    EXPECT_NEAR(r.p_value, p, 1e-6);
    EXPECT_DOUBLE_EQ(r.n_eff_a, static_cast<double>(a.size()));
    EXPECT_EQ(r.method, KsMethod::asymptotic);
}

std::vector<double> normals(std::size_t n, double shift, std::uint64_t seed) {
    Rng r(seed);
    std::vector<double> v(n);
    for (double& x : v) {
        x = r.normal() + shift;
    }
    return v;
}

}  // namespace

TEST(FreqKs, MatchesScipyOnSmallSamples) { check_against_scipy(oracle::kSmallA, oracle::kSmallB, oracle::kSmallD, oracle::kSmallP); }

TEST(FreqKs, MatchesScipyWithTies) { check_against_scipy(oracle::kTiedA, oracle::kTiedB, oracle::kTiedD, oracle::kTiedP); }

TEST(FreqKs, MatchesScipyOnShiftedSamples) {
    check_against_scipy(oracle::kShiftedA, oracle::kShiftedB, oracle::kShiftedD, oracle::kShiftedP);
}

TEST(FreqKs, StatisticMatchesPlainMerge) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = normals(30 + s * 7, 0.0, s);
        const auto b = normals(45 + s * 3, 0.3, s + 100);
        EXPECT_NEAR(ks_statistic(WeightedSample::unit(a), WeightedSample::unit(b)), oracle::plain_ks(a, b), 1e-12);
    }
}

TEST(FreqKs, WeightedEcdfSteps) {
    const WeightedSample s{{3.0, 1.0, 2.0, 1.0}, {1.0, 2.0, 3.0, 2.0}};
    const WeightedEcdf e = weighted_ecdf(s);
    ASSERT_EQ(e.x, (std::vector<double>{1.0, 2.0, 3.0}));
    EXPECT_DOUBLE_EQ(e.F[0], 0.5);
    EXPECT_DOUBLE_EQ(e.F[1], 0.875);
    EXPECT_EQ(e.F[2], 1.0);
    EXPECT_EQ(e(0.5), 0.0);
    EXPECT_DOUBLE_EQ(e(1.0), 0.5);
    EXPECT_DOUBLE_EQ(e(2.5), 0.875);
    EXPECT_EQ(e(10.0), 1.0);
}

TEST(FreqKs, KishSize) {
    EXPECT_DOUBLE_EQ(effective_sample_size(std::vector<double>{1, 1, 1, 1}), 4.0);
    EXPECT_DOUBLE_EQ(effective_sample_size(std::vector<double>{3, 1}), 1.6);
}

TEST(FreqKs, Invariances) {
    const auto a = normals(80, 0.0, 1);
    const auto b = normals(60, 0.4, 2);
    const double d = ks_statistic(WeightedSample::unit(a), WeightedSample::unit(b));
    // symmetric
    EXPECT_EQ(ks_statistic(WeightedSample::unit(b), WeightedSample::unit(a)), d);
    // monotone transform of both samples
    std::vector<double> ea(a);
    std::vector<double> eb(b);
    for (double& x : ea) {
        x = std::exp(x);
    }
    for (double& x : eb) {
        x = std::exp(x);
    }
    EXPECT_NEAR(ks_statistic(WeightedSample::unit(ea), WeightedSample::unit(eb)), d, 1e-12);
    // scaling all weights of one sample
    WeightedSample wa{a, std::vector<double>(a.size(), 7.5)};
    EXPECT_NEAR(ks_statistic(wa, WeightedSample::unit(b)), d, 1e-12);
    // integer weights equal replication
    WeightedSample w2{a, std::vector<double>(a.size(), 1.0)};
    std::vector<double> rep(a);
    for (std::size_t i = 0; i < 10; ++i) {
        w2.weights[i] = 3.0;
        rep.push_back(a[i]);
        rep.push_back(a[i]);
    }
    EXPECT_NEAR(ks_statistic(w2, WeightedSample::unit(b)), oracle::plain_ks(rep, b), 1e-12);
}

TEST(FreqKs, AsymptoticCloseToPermutationOracle) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto a = normals(200, 0.0, 10 + s);
        const auto b = normals(200, 0.1 * static_cast<double>(s), 20 + s);
        const auto asym = two_sample_ks(WeightedSample::unit(a), WeightedSample::unit(b));
        const double perm = oracle::plain_permutation_p(a, b, 2000, 99 + s);
        EXPECT_NEAR(asym.p_value, perm, 0.02) << "fixture " << s;
    }
}

TEST(FreqKs, PermutationMethod) {
    const auto a = normals(100, 0.0, 3);
    const auto b = normals(90, 0.2, 4);
    KsTestOptions opts;
    opts.method = KsMethod::permutation;
    opts.permutations = 2000;
    opts.seed = 5;
    const auto serial = two_sample_ks(WeightedSample::unit(a), WeightedSample::unit(b), opts, Exec::serial);
    set_jobs(3);
    const auto parallel = two_sample_ks(WeightedSample::unit(a), WeightedSample::unit(b), opts, Exec::parallel);
    set_jobs(0);
    EXPECT_EQ(serial.p_value, parallel.p_value);
    EXPECT_EQ(serial.permutations, 2000U);
    const double oracle_p = oracle::plain_permutation_p(a, b, 2000, 1);
    EXPECT_NEAR(serial.p_value, oracle_p, 0.04);
    opts.permutations = 100;
    EXPECT_THROW(two_sample_ks(WeightedSample::unit(a), WeightedSample::unit(b), opts), Error);
}

TEST(FreqKs, DegenerateConstantSamples) {
    const auto r = two_sample_ks(WeightedSample::unit({2.0, 2.0, 2.0}), WeightedSample::unit({2.0, 2.0}));
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.d, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
}

TEST(FreqKs, EmptySampleIsRejected) {
    try {
        two_sample_ks(WeightedSample{}, WeightedSample::unit({1.0}));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::empty_input);
    }
}

TEST(FreqKs, JsonAndEcdfFile) {
    const auto r = two_sample_ks(WeightedSample::unit(oracle::kSmallA), WeightedSample::unit(oracle::kSmallB));
    const nlohmann::json j = r;
    const auto back = j.get<KsTestResult>();
    EXPECT_EQ(back.d, r.d);
    EXPECT_EQ(back.p_value, r.p_value);
    const auto path = std::filesystem::temp_directory_path() / "equivcheck_test_ecdf.csv";
    write_ecdf(path, weighted_ecdf(WeightedSample::unit({1.0, 2.0})));
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x,F");
    std::filesystem::remove(path);
}
