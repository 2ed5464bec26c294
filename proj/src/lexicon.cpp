#include "deidkit/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "deidkit/errors.hpp"

namespace deidkit {

namespace {

// Keep in sync with data/clinical_lexicon.txt.
constexpr std::string_view kBuiltin[] = {
    "aspirin", "insulin", "metformin", "warfarin", "heparin", "lisinopril", "atorvastatin", "amlodipine",
    "metoprolol", "furosemide", "prednisone", "amoxicillin", "vancomycin", "ceftriaxone", "morphine",
    "acetaminophen", "ibuprofen", "omeprazole", "levothyroxine", "gabapentin", "apixaban", "clopidogrel",
    "salbutamol", "hydrochlorothiazide", "mg", "mcg", "ml", "units", "bid", "tid", "qid", "daily", "prn",
    "hypertension", "diabetes", "pneumonia", "sepsis", "asthma", "copd", "stroke", "infarction", "fracture",
    "fever", "cough", "dyspnea", "nausea", "vomiting", "pain", "edema", "anemia", "tachycardia", "bradycardia",
    "hypotension", "fibrillation", "cancer", "carcinoma", "tumor", "lesion", "infection", "allergy",
    "allergic", "smoking", "alcohol", "ct", "mri", "xray", "ecg", "ekg", "biopsy", "surgery", "appendectomy",
    "cholecystectomy", "catheter", "intubation", "dialysis", "transfusion", "creatinine", "hemoglobin",
    "glucose", "potassium", "sodium", "troponin", "platelets", "wbc", "inr", "bp", "hr", "spo2", "temp",
    "stop", "discontinue", "start", "increase", "decrease", "negative", "positive", "history", "chronic",
    "acute", "denies", "no",
};

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool is_numeric_token(std::string_view t) {
  if (t.empty()) return false;
  bool digit = false, dot = false;
  for (char c : t) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digit;
}

ClinicalLexicon::ClinicalLexicon(std::set<std::string> terms) {
  for (const auto& t : terms) terms_.insert(to_lower_ascii(t));
}

ClinicalLexicon ClinicalLexicon::builtin() {
  std::set<std::string> terms;
  for (auto t : kBuiltin) terms.emplace(t);
  return ClinicalLexicon(std::move(terms));
}

ClinicalLexicon ClinicalLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon " + path.string());
  std::set<std::string> terms;
  std::string line;
  while (std::getline(in, line)) {
    line = line.substr(0, line.find('#'));
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    terms.insert(line.substr(b, e - b + 1));
  }
  return ClinicalLexicon(std::move(terms));
}

bool ClinicalLexicon::contains(std::string_view token) const { return terms_.count(to_lower_ascii(token)) != 0; }

}  // namespace deidkit
