#include "signface/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "signface/errors.hpp"

namespace signface {

EvalReport compute_report(const ConfusionMatrix& confusion) {
  if ((confusion.array() < 0).any()) throw MalformedInput("confusion matrix has negative entries");
  EvalReport r;
  r.confusion = confusion;
  r.n = confusion.sum();
  if (r.n == 0) throw EmptyDataset("no samples to evaluate");

  const double n = static_cast<double>(r.n);
  r.accuracy = static_cast<double>(confusion.trace()) / n;
  for (int k = 0; k < kNumClasses; ++k) {
    const auto tp = static_cast<double>(confusion(k, k));
    const auto predicted = static_cast<double>(confusion.col(k).sum());
    const auto support = static_cast<double>(confusion.row(k).sum());
    auto& s = r.per_class[k];
    s.precision = predicted > 0 ? tp / predicted : 0.0;
    s.recall = support > 0 ? tp / support : 0.0;
    s.f1 = (s.precision + s.recall) > 0
               ? 2 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    if (predicted == 0 || support == 0 || s.precision + s.recall == 0) r.zero_division = true;

    const double w = support / n;
    r.weighted.precision += w * s.precision;
    r.weighted.f1 += w * s.f1;
    r.macro.precision += s.precision / kNumClasses;
    r.macro.recall += s.recall / kNumClasses;
    r.macro.f1 += s.f1 / kNumClasses;
  }
  // sum_k (support_k/n)(tp_k/support_k) == trace/n
  r.weighted.recall = r.accuracy;
  return r;
}

std::string format_percent(double rate) {
  // half up at the 4th decimal; epsilon covers values like 0.96125
  const double scaled = std::floor(rate * 10000.0 + 0.5 + 1e-9);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", scaled / 100.0);
  return buf;
}

namespace {

nlohmann::ordered_json scores_json(const ClassScores& s) {
  nlohmann::ordered_json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  return j;
}

}  // namespace

std::string report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  auto rows = nlohmann::ordered_json::array();
  for (int i = 0; i < kNumClasses; ++i) {
    auto row = nlohmann::ordered_json::array();
    for (int k = 0; k < kNumClasses; ++k) row.push_back(r.confusion(i, k));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  j["accuracy"] = r.accuracy;
  auto per_class = nlohmann::ordered_json::array();
  for (int k = 0; k < kNumClasses; ++k) {
    auto c = scores_json(r.per_class[k]);
    c["class"] = std::string(to_string(SentenceType(k)));
    per_class.push_back(c);
  }
  j["per_class"] = per_class;
  j["weighted"] = scores_json(r.weighted);
  j["macro"] = scores_json(r.macro);
  j["n"] = r.n;
  j["zero_division"] = r.zero_division;
  return j.dump(2) + "\n";
}

std::string format_report_table(const EvalReport& r, const std::string& title) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-22s %12s %13s %10s %12s\n", "", "Accuracy(%)",
                "Precision(%)", "Recall(%)", "F1 Score(%)");
  os << line;
  std::snprintf(line, sizeof line, "%-22s %12s %13s %10s %12s\n", title.c_str(),
                format_percent(r.accuracy).c_str(), format_percent(r.weighted.precision).c_str(),
                format_percent(r.weighted.recall).c_str(), format_percent(r.weighted.f1).c_str());
  os << line;
  os << "n = " << r.n << ", correct = " << r.confusion.trace() << "\n";
  return os.str();
}

}  // namespace signface
