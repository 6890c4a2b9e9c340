#pragma once

// JSON serialization of probes and verdicts. Every probe object carries the
// fields test, params, checkpoints, verdict and witnesses. Non-finite numbers
// are written as the strings "inf", "-inf" and "nan" so that reports stay
// valid JSON. Key order is fixed, so identical inputs give identical bytes.

#include <json.hpp>

#include "deltasa/deficiency.hpp"

namespace deltasa {

using json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

json number(double x);

json to_json(const WindowSup& w);
json to_json(const GrowthFit& g);
json to_json(const Summability& s);
json to_json(const RatioStats& r);
json to_json(const SeriesProbe& p);
json to_json(const BoundProbe& p);
json to_json(const ConditionB& b);
json to_json(const FloquetResult& f);
json to_json(const OracleRun& run);

/// The verdict block of a report; stage timings only when `with_timings`.
json to_json(const CriterionVerdict& v, bool with_timings = false);

}  // namespace deltasa
