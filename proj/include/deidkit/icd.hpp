#pragma once

#include <span>
#include <string>
#include <vector>

#include "deidkit/backends.hpp"

namespace deidkit {

enum class ReportScale { Unit, Percent };

struct IcdConfig {
  /// Applied to sigmoid(logit) when binarizing for JSC; must lie in (0,1).
  double binarization_threshold = 0.5;
  ReportScale report_scale = ReportScale::Unit;
};

/// Calls the backend; failures are rethrown with a hash of the text for audit.
std::vector<CodePrediction> predict_codes(const std::string& text, IcdBackend& backend);

/// Jaccard overlap of the codes whose sigmoid(logit) >= threshold. Both sides empty gives 1.0.
/// Always on the unit scale. Throws InputError on vocabulary mismatch or bad threshold.
double jsc(std::span<const CodePrediction> orig, std::span<const CodePrediction> deid, const IcdConfig& cfg = {});

/// NSDCG: relevance is the softmax of the original logits; DCG ranks codes by deid logit with a
/// 1/log2(rank+1) discount and is divided by the DCG of the original ranking. Ties sort by code.
double nsdcg(std::span<const CodePrediction> orig, std::span<const CodePrediction> deid);

/// Applies report_scale (Percent multiplies by 100).
double scaled(double unit_value, const IcdConfig& cfg);

}  // namespace deidkit
