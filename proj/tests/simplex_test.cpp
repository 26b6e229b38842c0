#include "sfmab/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "sfmab/testing/grid_oracle.hpp"

namespace {

using sfmab::CumulativeLoss;
using sfmab::Exponential;
using sfmab::LogBarrier;
using sfmab::SimplexPoint;

template <class P>
double residual(std::span<const double> theta, double lambda)
{
	double g = 0.0;
	for (double t : theta) g += P::psi(t + lambda);
	return std::abs(g - 1.0);
}

TEST(SolveLambda, ZeroThetaGivesUniform)
{
	for (std::size_t n : {2u, 3u, 7u, 50u}) {
		const std::vector<double> theta(n, 0.0);
		EXPECT_DOUBLE_EQ(sfmab::solve_lambda<LogBarrier>(theta), -static_cast<double>(n));
	}
}

TEST(SolveLambda, TwoArmGoldenRatio)
{
	// -1/lambda - 1/(lambda - 1) = 1  <=>  lambda^2 + lambda - 1 = 0, negative root.
	const std::vector<double> theta{0.0, -1.0};
	const double lambda = sfmab::solve_lambda<LogBarrier>(theta);
	EXPECT_NEAR(lambda, (-1.0 - std::sqrt(5.0)) / 2.0, 1e-10);
	EXPECT_NEAR(lambda, -1.6180339887, 1e-10);
}

TEST(SolveLambda, ExponentialAlreadyNormalized)
{
	const std::vector<double> theta{std::log(0.2), std::log(0.8)};
	EXPECT_NEAR(sfmab::solve_lambda<Exponential>(theta), 0.0, 1e-14);
}

TEST(SolveLambda, SingleCoordinate)
{
	const std::vector<double> theta{3.0};
	EXPECT_DOUBLE_EQ(sfmab::solve_lambda<LogBarrier>(theta), -4.0);
}

TEST(SolveLambda, RejectsNonFiniteTheta)
{
	const std::vector<double> theta{0.0, std::nan("")};
	EXPECT_THROW(sfmab::solve_lambda<LogBarrier>(theta), sfmab::DomainError);
}

template <class P>
void check_random_residuals(std::uint64_t seed)
{
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> entry(-50.0, 50.0);
	std::uniform_int_distribution<int> size(2, 20);
	for (int k = 0; k < 1000; ++k) {
		std::vector<double> theta(size(rng));
		for (double& t : theta) t = entry(rng);
		const auto sol = sfmab::normalize<P>(theta);
		ASSERT_LE(residual<P>(theta, sol.lambda), 1e-12);
		ASSERT_LT(sol.lambda, P::upper() - *std::max_element(theta.begin(), theta.end()));
		// g(theta, .) is increasing through the root.
		const double d = 1e-6 * (1.0 + std::abs(sol.lambda));
		double below = 0.0, above = 0.0;
		for (double t : theta) {
			below += P::psi(t + sol.lambda - d);
			if (t + sol.lambda + d < P::upper()) above += P::psi(t + sol.lambda + d);
			else above = std::numeric_limits<double>::infinity();
		}
		ASSERT_LT(below, 1.0);
		ASSERT_GT(above, 1.0);
	}
}

TEST(SolveLambda, ResidualOnRandomThetaLogBarrier)
{
	check_random_residuals<LogBarrier>(101);
}

TEST(SolveLambda, ResidualOnRandomThetaExponential)
{
	check_random_residuals<Exponential>(202);
}

// ---------------------------------------------------------------------------

TEST(FtrlIterate, ZeroLossIsUniform)
{
	CumulativeLoss cum(4);
	const SimplexPoint p = sfmab::ftrl_iterate<LogBarrier>(3.0, cum);
	for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(p[i], 0.25);
}

TEST(FtrlIterate, TwoArmExample)
{
	CumulativeLoss cum(2);
	cum.add(std::vector<double>{0.0, 1.0});
	const SimplexPoint p = sfmab::ftrl_iterate<LogBarrier>(1.0, cum);
	EXPECT_NEAR(p[0], 0.6180339887, 1e-10);
	EXPECT_NEAR(p[1], 0.3819660113, 1e-10);
	// Independent value from direct minimization of -ln q1 - ln q2 + q2.
	EXPECT_NEAR(p[0], 0.618034000, 1e-6);
}

TEST(FtrlIterate, ConstantLossIsUniform)
{
	for (double eta : {0.01, 1.0, 250.0}) {
		CumulativeLoss cum(5);
		cum.add(std::vector<double>(5, 17.5));
		const SimplexPoint p = sfmab::ftrl_iterate<LogBarrier>(eta, cum);
		for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(p[i], 0.2, 1e-12);
	}
}

TEST(FtrlIterate, TranslationInvariance)
{
	std::mt19937_64 rng(5);
	std::normal_distribution<double> normal(0.0, 3.0);
	for (int k = 0; k < 200; ++k) {
		std::vector<double> base(6);
		for (double& b : base) b = normal(rng);
		const double shift = 100.0 * normal(rng);
		std::vector<double> shifted = base;
		for (double& s : shifted) s += shift;
		CumulativeLoss a(6), b(6);
		a.add(base);
		b.add(shifted);
		const double eta = 0.05 + std::abs(normal(rng));
		const SimplexPoint pa = sfmab::ftrl_iterate<LogBarrier>(eta, a);
		const SimplexPoint pb = sfmab::ftrl_iterate<LogBarrier>(eta, b);
		for (std::size_t i = 0; i < 6; ++i) ASSERT_NEAR(pa[i], pb[i], 1e-10);
	}
}

TEST(FtrlIterate, MatchesGridArgmin)
{
	std::mt19937_64 rng(17);
	std::normal_distribution<double> normal(0.0, 1.0);
	for (std::size_t n : {2u, 3u}) {
		for (int k = 0; k < 10; ++k) {
			std::vector<double> sum(n);
			for (double& s : sum) s = 2.0 * normal(rng);
			CumulativeLoss cum(n);
			cum.add(sum);
			const double eta = 0.2 + std::abs(normal(rng));
			const SimplexPoint p = sfmab::ftrl_iterate<LogBarrier>(eta, cum);
			const auto ref = sfmab::testing::ftrl_argmin_by_grid<LogBarrier>(sum, eta);
			for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(p[i], ref.argmax[i], 1e-6);
		}
	}
}

// ---------------------------------------------------------------------------

TEST(MixabilityGap, ZeroLoss)
{
	const SimplexPoint p({0.1, 0.6, 0.3});
	const auto gap = sfmab::mixability_gap<LogBarrier>(p, std::vector<double>(3, 0.0), 1.0);
	EXPECT_EQ(gap.value, 0.0);
	EXPECT_EQ(gap.maximizer, p);
}

TEST(MixabilityGap, TwoArmGridValue)
{
	// Dense-grid maximum over q in the 1-simplex (step 1e-7).
	const auto gap = sfmab::mixability_gap<LogBarrier>(SimplexPoint::uniform(2),
							   std::vector<double>{1.0, 0.0}, 0.1);
	EXPECT_NEAR(gap.value, 0.006248048501, 1e-4);
	EXPECT_NEAR(gap.value, 0.006248048501, 1e-10);
	EXPECT_NEAR(gap.maximizer[0], 0.4875078, 1e-6);
}

TEST(MixabilityGap, ConstantLossHasNoGap)
{
	const SimplexPoint p({0.05, 0.15, 0.3, 0.5});
	for (double c : {-40.0, 1.0, 1e4}) {
		const auto gap = sfmab::mixability_gap<LogBarrier>(p, std::vector<double>(4, c), 0.7);
		EXPECT_NEAR(gap.value, 0.0, 1e-10 * (1.0 + std::abs(c)));
	}
}

TEST(MixabilityGap, SingleArm)
{
	const auto gap = sfmab::mixability_gap<LogBarrier>(SimplexPoint::uniform(1),
							   std::vector<double>{5.0}, 1.0);
	EXPECT_EQ(gap.value, 0.0);
}

TEST(MixabilityGap, RejectsBadRate)
{
	EXPECT_THROW(sfmab::mixability_gap<LogBarrier>(SimplexPoint::uniform(2),
						       std::vector<double>{1.0, 0.0}, 0.0),
		     sfmab::DomainError);
}

struct GapInstance {
	SimplexPoint p;
	std::vector<double> loss;
	double eta;
};

GapInstance random_instance(std::mt19937_64& rng, std::size_t n)
{
	std::uniform_real_distribution<double> unit(0.0, 1.0);
	std::normal_distribution<double> normal(0.0, 1.0);
	std::vector<double> c(n);
	double total = 0.0;
	for (double& x : c) {
		x = 0.05 + unit(rng);
		total += x;
	}
	for (double& x : c) x /= total;
	std::vector<double> loss(n, 0.0);
	if (unit(rng) < 0.3) {
		// IW-style one-hot loss, possibly large and negative.
		const std::size_t arm = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
		loss[arm] = -5.0 * (1.0 + 4.0 * unit(rng));
	} else {
		for (double& l : loss) l = 3.0 * normal(rng);
	}
	return {SimplexPoint(c), loss, 0.05 + 2.0 * unit(rng)};
}

TEST(MixabilityGap, MatchesGridOracleAndStabilityBound)
{
	std::mt19937_64 rng(23);
	for (int k = 0; k < 60; ++k) {
		const std::size_t n = k % 2 == 0 ? 2 : 3;
		const GapInstance inst = random_instance(rng, n);
		const auto gap = sfmab::mixability_gap<LogBarrier>(inst.p, inst.loss, inst.eta);
		const auto ref = sfmab::testing::mixability_gap_by_grid<LogBarrier>(inst.p.coords(),
										     inst.loss, inst.eta);
		ASSERT_NEAR(gap.value, ref.value, 1e-4);
		double linf = 0.0;
		for (double l : inst.loss) linf = std::max(linf, std::abs(l));
		const double cap = std::min(2.0 * linf, sfmab::stability_bound(inst.p, inst.loss, inst.eta));
		ASSERT_GE(gap.value, 0.0);
		ASSERT_LE(gap.value, cap + 1e-10);
	}
}

TEST(MixabilityGap, ExponentialPotentialMatchesClosedForm)
{
	// With the entropic regularizer M(eta) = <p, l> + ln(sum_i p_i e^{-eta l_i}) / eta.
	std::mt19937_64 rng(29);
	for (int k = 0; k < 50; ++k) {
		const GapInstance inst = random_instance(rng, 4);
		const auto gap = sfmab::mixability_gap<Exponential>(inst.p, inst.loss, inst.eta);
		double mean = 0.0, mgf = 0.0;
		for (std::size_t i = 0; i < 4; ++i) {
			mean += inst.p[i] * inst.loss[i];
			mgf += inst.p[i] * std::exp(-inst.eta * inst.loss[i]);
		}
		EXPECT_NEAR(gap.value, mean + std::log(mgf) / inst.eta, 1e-9);
	}
}

// ---------------------------------------------------------------------------

TEST(CumulativeLoss, CompensatesCancellation)
{
	CumulativeLoss cum(1);
	cum.add(std::vector<double>{1e16});
	for (int k = 0; k < 10; ++k) cum.add(std::vector<double>{1.0});
	cum.add(std::vector<double>{-1e16});
	EXPECT_EQ(cum[0], 10.0);
	EXPECT_EQ(cum.rounds(), 12u);
}

TEST(SimplexPoint, Validation)
{
	EXPECT_THROW(SimplexPoint({0.5, 0.6}), sfmab::DomainError);
	EXPECT_THROW(SimplexPoint({1.0, 0.0}), sfmab::DomainError);
	const SimplexPoint c = SimplexPoint::near_vertex(4, 2, 0.1);
	EXPECT_NEAR(c[2], 0.9 + 0.025, 1e-15);
	EXPECT_NEAR(c[0], 0.025, 1e-15);
}

}  // namespace
