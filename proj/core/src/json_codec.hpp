// Internal JSON codecs shared by serialization.cpp and problem.cpp; the
// vendor type stays out of the installed headers.
#pragma once

#include "optstop/classify.hpp"
#include "optstop/dp_oracle.hpp"
#include "optstop/levy.hpp"
#include "optstop/smooth_fit.hpp"
#include "optstop/solver.hpp"

#include <json.hpp>

namespace optstop::codec {

using nlohmann::json;

json encodeFinite(double v); // +-infinity become "inf"/"-inf" strings
double decodeFinite(const json& j, const char* what);

json rewardToJson(const RewardFunction& f);
RewardFunction rewardFromJson(const json& j);

json jumpToJson(const JumpLaw& j);
JumpLaw jumpFromJson(const json& j);

json lawToJson(const IncrementLaw& law);
IncrementLaw lawFromJson(const json& j);

json modelToJson(const LevyModel& m);
LevyModel modelFromJson(const json& j);

json verdictToJson(const FinitenessVerdict& v);
json solutionToJson(const ThresholdSolution& s);
json crossValidationToJson(const CrossValidation& cv);
json sequenceToJson(const ThresholdSequence& seq);
json smoothFitToJson(const SmoothFitReport& rep);

const char* regimeName(Regime r);
const char* finitenessName(Finiteness f);

} // namespace optstop::codec
