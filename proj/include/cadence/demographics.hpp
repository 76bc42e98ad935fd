#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cadence {

enum class Attribute { Gender, AgeCohort, Marital, Child };

inline constexpr std::array<Attribute, 4> kAttributes = {
    Attribute::Gender, Attribute::AgeCohort, Attribute::Marital,
    Attribute::Child};

inline int category_count(Attribute a) {
  return a == Attribute::AgeCohort ? 6 : 2;
}

inline const char* attribute_name(Attribute a) {
  switch (a) {
    case Attribute::Gender: return "Gender";
    case Attribute::AgeCohort: return "Age range";
    case Attribute::Marital: return "Marital status";
    case Attribute::Child: return "Child";
  }
  return "";
}

inline Attribute parse_attribute(std::string_view s) {
  if (s == "gender" || s == "Gender") return Attribute::Gender;
  if (s == "age_cohort" || s == "Age range" || s == "age") return Attribute::AgeCohort;
  if (s == "marital" || s == "Marital status") return Attribute::Marital;
  if (s == "child" || s == "Child") return Attribute::Child;
  throw std::invalid_argument("unknown attribute: " + std::string(s));
}

inline std::string category_label(Attribute a, int category) {
  switch (a) {
    case Attribute::Gender: return category == 0 ? "Female" : "Male";
    case Attribute::AgeCohort: return std::to_string(category + 1);
    case Attribute::Marital: return category == 0 ? "Married" : "Unmarried";
    case Attribute::Child: return category == 0 ? "No children" : "With children";
  }
  return "";
}

/// One user's categorical attributes. Categories are 0-based indices;
/// age_cohort 0..5 maps to the published cohorts 1..6.
struct DemographicRecord {
  std::string user_id;
  int gender = 0;      // 0 Female, 1 Male
  int age_cohort = 0;  // 0..5
  int marital = 0;     // 0 Married, 1 Unmarried
  int child = 0;       // 0 without, 1 with
};

inline int category_of(const DemographicRecord& r, Attribute a) {
  switch (a) {
    case Attribute::Gender: return r.gender;
    case Attribute::AgeCohort: return r.age_cohort;
    case Attribute::Marital: return r.marital;
    case Attribute::Child: return r.child;
  }
  return 0;
}

class DemographicTable {
 public:
  /// Returns false (and leaves the table unchanged) on a duplicate user id.
  bool add(DemographicRecord record) {
    auto [it, inserted] = index_.emplace(record.user_id, records_.size());
    if (!inserted) return false;
    records_.push_back(std::move(record));
    return true;
  }

  const DemographicRecord* find(const std::string& user_id) const {
    auto it = index_.find(user_id);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  std::size_t size() const { return records_.size(); }
  const std::vector<DemographicRecord>& records() const { return records_; }

 private:
  std::vector<DemographicRecord> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace cadence
