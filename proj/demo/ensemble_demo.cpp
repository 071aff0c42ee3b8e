// Forecasts one day of a synthetic load series with each diversity strategy
// and prints MAPE and member diversity.

#include <cstdio>

#include "randens/ensemble.hpp"
#include "randens/metrics.hpp"
#include "randens/patterns.hpp"
#include "randens/synth.hpp"

int main() {
  using namespace randens;

  SynthParams params;
  params.days = 400;
  params.noise_sd = 0.02;
  const CycleIndex cycles(synth_series(params));
  const Date target = cycles.cycles().back().date();

  const TrainingSet phi = build_training_set(cycles, target);
  const EncodedInput query = make_query(cycles, target);
  const auto& actual = cycles.find(target)->values;
  const Matrix A = Eigen::Map<const Eigen::RowVectorXd>(actual.data(), static_cast<Eigen::Index>(actual.size()));

  std::printf("forecast for %s from %zu training pairs\n", format_date(target).c_str(), phi.size());
  const DiversityStrategy strategies[] = {
      {Strategy::E1, 70.0}, {Strategy::E2, 0.5}, {Strategy::E3, 16.0 / 24.0},
      {Strategy::E4, 0.5, 80}, {Strategy::E5, 0.1}, {Strategy::E6, 0.02},
  };
  for (const auto& s : strategies) {
    const Ensemble ens = train_ensemble(phi, s, 50, RandNNConfig{40, 70.0, 7});
    const Matrix F = member_forecasts(ens, query.pattern.x, query.coding);
    const auto mean = mean_forecast(F);
    const Matrix Fm = Eigen::Map<const Eigen::RowVectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    const std::vector<Matrix> blocks{F};
    std::printf("  %s  MAPE %.3f%%  diversity %.3f\n", std::string(to_string(s.kind)).c_str(), mape(A, Fm),
                diversity(blocks).value);
  }
  return 0;
}
