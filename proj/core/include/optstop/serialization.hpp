#pragma once

#include "optstop/dp_oracle.hpp"
#include "optstop/levy.hpp"
#include "optstop/smooth_fit.hpp"
#include "optstop/solver.hpp"

#include <ostream>
#include <string>

namespace optstop {

// JSON text forms of the domain objects; formats documented in
// schemas/problem_spec.schema.json. Custom rewards are runtime-only and do
// not serialize.
std::string toJsonText(const RewardFunction& f);
RewardFunction rewardFromJsonText(const std::string& text);

std::string toJsonText(const IncrementLaw& law);
IncrementLaw lawFromJsonText(const std::string& text);

std::string toJsonText(const LevyModel& model);
LevyModel modelFromJsonText(const std::string& text);

std::string toJsonText(const ThresholdSolution& solution);
std::string toJsonText(const FinitenessVerdict& verdict);
std::string toJsonText(const SmoothFitReport& report);

// CSV emitters used by the batch front end.
void writeValueCsv(std::ostream& os, std::span<const double> xs, const RewardFunction& f,
                   std::span<const Estimate> values);
void writeRatioCsv(std::ostream& os, const std::vector<RatioPoint>& trace);
void writeSequenceCsv(std::ostream& os, const ThresholdSequence& seq);
void writeDpCsv(std::ostream& os, const DpResult& dp, const RewardFunction& f);
void writeDerivativeCsv(std::ostream& os, const DerivativeEstimate& d);

} // namespace optstop
