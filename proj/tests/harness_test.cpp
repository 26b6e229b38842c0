#include "sfmab/harness.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

namespace {

using sfmab::AdversaryConfig;
using sfmab::AdversaryKind;
using sfmab::PolicyKind;
using sfmab::PolicySpec;

AdversaryConfig make(AdversaryKind kind, std::size_t n, std::size_t T, std::uint64_t seed = 1)
{
	AdversaryConfig c;
	c.kind = kind;
	c.arms = n;
	c.rounds = T;
	c.seed = seed;
	return c;
}

std::string slurp(const std::filesystem::path& p)
{
	std::ifstream in(p, std::ios::binary);
	std::stringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

std::filesystem::path scratch(const std::string& name)
{
	const auto dir = std::filesystem::path(::testing::TempDir()) / ("sfmab_" + name);
	std::filesystem::remove_all(dir);
	return dir;
}

TEST(RunExperiment, ZeroLossHasZeroRegret)
{
	const auto seeds = sfmab::seed_range(1, 4);
	for (PolicyKind k : {PolicyKind::kScaleFreeOpt1, PolicyKind::kScaleFreeOpt2, PolicyKind::kExp3}) {
		const auto exp = sfmab::run_experiment(PolicySpec{k, 1.0},
						       make(AdversaryKind::kZero, 3, 200), seeds);
		for (const auto& run : exp.runs) {
			EXPECT_EQ(run.regret, 0.0);
			for (const auto& r : run.records) ASSERT_EQ(r.cum_regret, 0.0);
		}
		EXPECT_EQ(exp.summary.mean_regret, 0.0);
		EXPECT_EQ(exp.summary.ratio_horizon, 0.0);
		EXPECT_EQ(exp.summary.ratio_data, 0.0);
	}
}

TEST(RunExperiment, RejectsEmptyOrDuplicateSeeds)
{
	const auto cfg = make(AdversaryKind::kBoundedUniform, 2, 10);
	EXPECT_THROW(sfmab::run_experiment(PolicySpec{}, cfg, {}), sfmab::PreconditionError);
	EXPECT_THROW(sfmab::run_experiment(PolicySpec{}, cfg, {3, 3}), sfmab::PreconditionError);
}

TEST(RunExperiment, RecordsAreConsistent)
{
	const auto cfg = make(AdversaryKind::kBoundedUniform, 4, 300, 5);
	const auto losses = sfmab::generate(cfg);
	const auto exp = sfmab::run_experiment(PolicySpec{PolicyKind::kScaleFreeOpt2}, cfg, {7, 8});
	for (const auto& run : exp.runs) {
		ASSERT_EQ(run.records.size(), 300u);
		double incurred = 0.0;
		for (std::size_t t = 0; t < 300; ++t) {
			const auto& r = run.records[t];
			EXPECT_EQ(r.t, t + 1);
			EXPECT_EQ(r.loss, losses.at(t, r.arm));
			incurred += r.loss;
		}
		EXPECT_EQ(incurred, run.incurred);
		EXPECT_EQ(run.records.back().cum_regret, run.regret);
		EXPECT_DOUBLE_EQ(run.regret, run.incurred - sfmab::column_sums(losses)[sfmab::best_arm(losses)]);
		EXPECT_EQ(run.records.front().gamma, 0.5);
		EXPECT_EQ(run.records.front().eta, 4.0);
	}
}

TEST(RunExperiment, DeterministicAcrossThreadCounts)
{
	const auto cfg = make(AdversaryKind::kSignMixed, 3, 250, 2);
	const auto seeds = sfmab::seed_range(10, 6);
	const auto a = sfmab::run_experiment(PolicySpec{PolicyKind::kScaleFreeOpt1}, cfg, seeds, {1, true});
	const auto b = sfmab::run_experiment(PolicySpec{PolicyKind::kScaleFreeOpt1}, cfg, seeds, {4, true});
	EXPECT_EQ(a.summary.regrets, b.summary.regrets);
	for (std::size_t k = 0; k < seeds.size(); ++k) {
		EXPECT_EQ(a.runs[k].seed, seeds[k]);
		EXPECT_EQ(sfmab::trace_csv(a.runs[k].records), sfmab::trace_csv(b.runs[k].records));
	}
}

TEST(RunExperiment, PropagatesScaleViolation)
{
	const auto base = make(AdversaryKind::kBoundedUniform, 3, 50);
	EXPECT_THROW(sfmab::run_experiment(PolicySpec{PolicyKind::kExp3, 1.0}, sfmab::rescaled(base, 100.0),
					   {1, 2}),
		     sfmab::ScaleViolation);
	EXPECT_NO_THROW(sfmab::run_experiment(PolicySpec{PolicyKind::kExp3, 1.0}, base, {1, 2}));
}

TEST(RunExperiment, StandardErrorShrinksWithSeeds)
{
	AdversaryConfig cfg = make(AdversaryKind::kBernoulliGap, 4, 400, 3);
	cfg.gap = 0.2;
	const PolicySpec spec{PolicyKind::kScaleFreeOpt2};
	const auto few = sfmab::run_experiment(spec, cfg, sfmab::seed_range(1000, 20), {0, false});
	const auto many = sfmab::run_experiment(spec, cfg, sfmab::seed_range(5000, 80), {0, false});
	// Quadrupling the seeds halves the standard error, up to sampling noise.
	const double ratio = many.summary.std_error / few.summary.std_error;
	EXPECT_NEAR(ratio, 0.5, 0.5 * 0.3);
}

TEST(Summary, BoundsAndDominance)
{
	AdversaryConfig cfg = make(AdversaryKind::kSparseHeavy, 10, 2000, 4);
	cfg.magnitude = 100.0;
	cfg.density = 0.0005;
	const auto exp = sfmab::run_experiment(PolicySpec{PolicyKind::kScaleFreeOpt2}, cfg, {1});
	const auto& s = exp.summary;
	const double n = 10.0;
	EXPECT_DOUBLE_EQ(s.bound_horizon, std::sqrt(n * s.norms.l2) + s.norms.linf * std::sqrt(n * 2000.0));
	EXPECT_DOUBLE_EQ(s.bound_data, std::sqrt(n * s.norms.l2) + s.norms.linf * std::sqrt(n * s.norms.l1));
	ASSERT_GT(s.norms.l1, 0.0);
	// The data-dependent bound is the smaller one exactly when L1 < T.
	ASSERT_LT(s.norms.l1, 2000.0);
	EXPECT_LT(s.bound_data, s.bound_horizon);
}

TEST(Emit, WritesSummaryAndTraces)
{
	const auto dir = scratch("emit");
	const auto cfg = make(AdversaryKind::kBoundedUniform, 3, 120, 8);
	const auto exp = sfmab::run_experiment(PolicySpec{PolicyKind::kScaleFreeOpt1}, cfg, {4, 9});
	const auto files = sfmab::emit(exp, dir);
	ASSERT_EQ(files.size(), 3u);
	const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
	EXPECT_EQ(summary["policy"], "opt1");
	EXPECT_EQ(summary["seeds"], nlohmann::json::array({4, 9}));
	EXPECT_EQ(summary["adversary"]["kind"], "bounded-uniform");
	EXPECT_EQ(summary["regret"]["per_seed"].size(), 2u);

	std::ifstream trace(dir / "trace_seed_9.csv");
	std::string line;
	std::getline(trace, line);
	EXPECT_EQ(line, "t,arm,loss,gamma,eta,cum_regret");
	std::size_t rows = 0;
	while (std::getline(trace, line)) ++rows;
	EXPECT_EQ(rows, 120u);
}

TEST(Emit, GoldenRunIsByteIdentical)
{
	const auto cfg = make(AdversaryKind::kSignMixed, 4, 200, 21);
	const auto d1 = scratch("golden1");
	const auto d2 = scratch("golden2");
	sfmab::emit(sfmab::run_experiment(PolicySpec{PolicyKind::kScaleFreeOpt2}, cfg, {42}), d1);
	sfmab::emit(sfmab::run_experiment(PolicySpec{PolicyKind::kScaleFreeOpt2}, cfg, {42}), d2);
	EXPECT_EQ(slurp(d1 / "trace_seed_42.csv"), slurp(d2 / "trace_seed_42.csv"));
	EXPECT_EQ(slurp(d1 / "summary.json"), slurp(d2 / "summary.json"));
}

TEST(Emit, ReportsPathOnFailure)
{
	const auto dir = scratch("blocked");
	std::filesystem::create_directories(dir);
	std::ofstream(dir / "file") << "x";
	const auto exp = sfmab::run_experiment(PolicySpec{}, make(AdversaryKind::kZero, 2, 5), {1});
	try {
		sfmab::emit(exp, dir / "file" / "sub");
		FAIL() << "expected IoError";
	} catch (const sfmab::IoError& e) {
		EXPECT_NE(std::string(e.what()).find("file"), std::string::npos);
	}
}

TEST(Json, AdversaryConfigRoundTrip)
{
	AdversaryConfig inner = make(AdversaryKind::kSparseHeavy, 6, 90, 5);
	inner.sparsity = 2;
	inner.magnitude = 12.5;
	inner.density = 0.25;
	const AdversaryConfig outer = sfmab::rescaled(inner, 0.01);
	const AdversaryConfig back = sfmab::adversary_from_json(sfmab::to_json(outer));
	EXPECT_EQ(sfmab::generate(back), sfmab::generate(outer));
	EXPECT_THROW(sfmab::adversary_from_json(sfmab::Json{{"kind", "bounded-uniform"}}),
		     sfmab::PreconditionError);
}

}  // namespace
