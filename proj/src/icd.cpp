#include "deidkit/icd.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "deidkit/errors.hpp"
#include "deidkit/hashing.hpp"

namespace deidkit {

namespace {

void check_vocabulary(std::span<const CodePrediction> a, std::span<const CodePrediction> b) {
  std::set<std::string> left, right;
  for (const auto& p : a) {
    if (!left.insert(p.code).second) throw InputError("duplicate code '" + p.code + "' in prediction set");
  }
  for (const auto& p : b) {
    if (!right.insert(p.code).second) throw InputError("duplicate code '" + p.code + "' in prediction set");
  }
  if (left != right) throw InputError("prediction sets are over different code vocabularies");
}

// Codes by logit descending, code ascending on ties.
std::vector<std::string> ranking(std::span<const CodePrediction> preds) {
  std::vector<const CodePrediction*> order;
  for (const auto& p : preds) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const CodePrediction* x, const CodePrediction* y) {
    if (x->logit != y->logit) return x->logit > y->logit;
    return x->code < y->code;
  });
  std::vector<std::string> out;
  for (const auto* p : order) out.push_back(p->code);
  return out;
}

}  // namespace

std::vector<CodePrediction> predict_codes(const std::string& text, IcdBackend& backend) {
  try {
    return backend.predict(text);
  } catch (const ProtocolError& e) {
    throw ProtocolError("ICD prediction for text " + to_hex(fnv1a(text)) + ": " + e.what(), e.status());
  } catch (const BackendError& e) {
    throw BackendError("ICD prediction for text " + to_hex(fnv1a(text)) + ": " + e.what());
  }
}

double jsc(std::span<const CodePrediction> orig, std::span<const CodePrediction> deid, const IcdConfig& cfg) {
  if (!(cfg.binarization_threshold > 0.0 && cfg.binarization_threshold < 1.0)) {
    throw InputError("binarization threshold must lie in (0,1)");
  }
  check_vocabulary(orig, deid);
  auto positives = [&](std::span<const CodePrediction> preds) {
    std::set<std::string> out;
    for (const auto& p : preds) {
      if (1.0 / (1.0 + std::exp(-p.logit)) >= cfg.binarization_threshold) out.insert(p.code);
    }
    return out;
  };
  const auto a = positives(orig);
  const auto b = positives(deid);
  std::size_t inter = 0;
  for (const auto& c : a) inter += b.count(c);
  const std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double nsdcg(std::span<const CodePrediction> orig, std::span<const CodePrediction> deid) {
  check_vocabulary(orig, deid);
  if (orig.empty()) throw InputError("nsdcg needs at least one code");
  double max_logit = orig.front().logit;
  for (const auto& p : orig) max_logit = std::max(max_logit, p.logit);
  std::map<std::string, double> relevance;
  double z = 0.0;
  for (const auto& p : orig) {
    const double e = std::exp(p.logit - max_logit);
    relevance[p.code] = e;
    z += e;
  }
  for (auto& [_, r] : relevance) r /= z;

  auto dcg = [&](const std::vector<std::string>& order) {
    double sum = 0.0;
    for (std::size_t rank = 1; rank <= order.size(); ++rank) {
      sum += relevance.at(order[rank - 1]) / std::log2(static_cast<double>(rank) + 1.0);
    }
    return sum;
  };
  const double ideal = dcg(ranking(orig));
  const double actual = dcg(ranking(deid));
  return std::min(actual / ideal, 1.0);
}

double scaled(double unit_value, const IcdConfig& cfg) {
  return cfg.report_scale == ReportScale::Percent ? unit_value * 100.0 : unit_value;
}

}  // namespace deidkit
