#include <gtest/gtest.h>

#include <random>

#include "dafjam/correlation.hpp"
#include "dafjam/fixtures.hpp"
#include "support/oracles.hpp"

using namespace dafjam;

namespace {

AudioBuffer shifted_mix(const AudioBuffer& dry, std::size_t shift, double g_nat, double g_fb) {
  AudioBuffer mix(dry.sample_rate_hz, dry.size() + shift);
  for (std::size_t n = 0; n < dry.size(); ++n) {
    mix.samples[n] += g_nat * dry.samples[n];
    mix.samples[n + shift] += g_fb * dry.samples[n];
  }
  return mix;
}

}  // namespace

TEST(CrossCorrelation, MatchesBruteForce) {
  std::mt19937 gen(1);
  for (int i = 0; i < 20; ++i) {
    const std::size_t na = 1 + gen() % 700;
    const std::size_t nb = 1 + gen() % 700;
    const std::size_t max_lag = gen() % 900;
    const auto a = oracle::random_signal(na, gen());
    const auto b = oracle::random_signal(nb, gen());
    const auto got = cross_correlation(a, b, max_lag);
    const auto want = oracle::xcorr(a, b, max_lag);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < want.size(); ++k) ASSERT_NEAR(got[k], want[k], 1e-9) << i << " " << k;
  }
}

TEST(MeasureFeedbackDelay, KnownShift) {
  const auto dry = fixtures::white_noise(48000, 0.5, 9);
  const auto mix = shifted_mix(dry, 4800, 1.0, 1.0);
  EXPECT_EQ(measure_feedback_delay(dry, mix, 0.0), 0.1);
}

TEST(MeasureFeedbackDelay, WhiteNoiseShift) {
  const auto dry = fixtures::white_noise(48000, 0.5, 10);
  const auto mix = shifted_mix(dry, 5760, gain_to_linear(-6.0), 1.0);
  EXPECT_NEAR(measure_feedback_delay(dry, mix, -6.0), 0.12, 1.0 / 48000);
}

TEST(MeasureFeedbackDelay, NoFeedbackIsNoPeak) {
  const auto dry = fixtures::white_noise(48000, 0.2, 11);
  const auto mix = shifted_mix(dry, 100, 1.0, 0.0);
  try {
    measure_feedback_delay(dry, mix, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoPeak);
  }
}

TEST(MeasureFeedbackDelay, UncorrelatedResidualIsNoPeak) {
  const auto dry = fixtures::white_noise(48000, 0.2, 12);
  auto mix = dry;
  const auto other = fixtures::white_noise(48000, 0.2, 13);
  for (std::size_t n = 0; n < mix.size(); ++n) mix.samples[n] += other.samples[n];
  try {
    measure_feedback_delay(dry, mix, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoPeak);
  }
}

TEST(MeasureFeedbackDelay, Preconditions) {
  const auto dry = fixtures::white_noise(48000, 0.1, 1);
  EXPECT_THROW(measure_feedback_delay(dry, fixtures::white_noise(44100, 0.1, 1), 0.0), Error);
  EXPECT_THROW(measure_feedback_delay(AudioBuffer(48000, std::size_t{100}), dry, 0.0), Error);
}

TEST(MeasureFeedbackDelay, RandomShifts) {
  std::mt19937 gen(77);
  for (int i = 0; i < 15; ++i) {
    const auto dry = fixtures::white_noise(16000, 0.25, gen());
    const std::size_t shift = gen() % 8000;
    const auto mix = shifted_mix(dry, shift, 1.0, 0.25 + (gen() % 100) / 50.0);
    EXPECT_EQ(measure_feedback_delay(dry, mix, 0.0), shift / 16000.0);
  }
}

TEST(WindowedLags, ConstantShift) {
  const auto dry = fixtures::white_noise(48000, 1.0, 21);
  const auto mix = shifted_mix(dry, 3000, 0.0, 1.0);
  const auto lags = windowed_lags(dry.samples, mix.samples, 48000, 0.05, 0.1);
  ASSERT_GE(lags.size(), 15u);
  for (const auto& e : lags) {
    EXPECT_EQ(e.lag_s, 3000 / 48000.0);
    EXPECT_NEAR(e.peak, 1.0, 1e-9);
  }
}

TEST(WindowedLags, ClickTrainShift) {
  const auto dry = fixtures::click_train(48000, 2.0, 0.01, 0.3, 0.05, 4);
  const auto mix = shifted_mix(dry, 7200, 0.0, 0.7);
  const auto lags = windowed_lags(dry.samples, mix.samples, 48000, 0.05, 0.25);
  ASSERT_GE(lags.size(), 5u);
  for (const auto& e : lags) {
    EXPECT_EQ(e.lag_s, 0.15);
    EXPECT_NEAR(e.peak, 1.0, 1e-9);
  }
}

TEST(WindowedLags, SilentResidualHasNoEstimates) {
  const auto dry = fixtures::white_noise(48000, 0.5, 2);
  const std::vector<double> silent(dry.size(), 0.0);
  EXPECT_TRUE(windowed_lags(dry.samples, silent, 48000, 0.05, 0.1).empty());
}
