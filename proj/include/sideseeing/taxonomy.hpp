#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sideseeing/instance.hpp"

namespace sideseeing {

struct TaxonomyCategory {
  std::string name;
  std::vector<std::string> elements;
};

// Two-level sidewalk vocabulary: 6 categories, 68 leaves.
class Taxonomy {
 public:
  explicit Taxonomy(std::vector<TaxonomyCategory> categories,
                    std::map<std::string, std::string> aliases = {});

  const std::vector<TaxonomyCategory>& categories() const { return categories_; }
  std::size_t leaf_count() const;
  const TaxonomyCategory* category(const std::string& name) const;

  // Canonical leaf name when (category, element) resolves, following aliases.
  std::optional<std::string> resolve(const std::string& category, const std::string& element) const;

  // FNV-1a 64 over "category/leaf\n" lines in table order.
  std::uint64_t checksum() const;
  std::string checksum_hex() const;

  nlohmann::json to_json() const;
  std::vector<std::string> lines() const;  // "category/leaf"

 private:
  std::vector<TaxonomyCategory> categories_;
  std::map<std::string, std::string> aliases_;  // alias -> canonical leaf
};

const Taxonomy& load_taxonomy();

struct Annotation {
  std::string id;
  std::string instance_id;
  std::int64_t t_start_ms = 0;
  std::int64_t t_end_ms = 0;
  std::string category;
  std::string element;
  std::string note;
  std::string author;
  std::int64_t created_at = 0;

  bool operator==(const Annotation&) const = default;
};

nlohmann::json to_json(const Annotation& a);
Annotation annotation_from_json(const nlohmann::json& doc);
std::vector<Annotation> annotations_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const std::vector<Annotation>& anns);

// Checks ids, intervals, taxonomy membership, and (when an instance is given)
// that intervals lie inside the instance span on the wall-clock timeline.
ValidationReport validate_annotations(const std::vector<Annotation>& anns, const Instance* inst,
                                      const Taxonomy& tax);
inline ValidationReport validate_annotations(const std::vector<Annotation>& anns,
                                             const Instance& inst, const Taxonomy& tax) {
  return validate_annotations(anns, &inst, tax);
}

struct LeafStats {
  std::size_t count = 0;
  std::int64_t covered_ms = 0;  // length of the union of intervals
};

struct CategoryStats {
  std::size_t count = 0;
  std::int64_t covered_ms = 0;
  std::map<std::string, LeafStats> leaves;  // every leaf of the category
};

struct AnnotationStats {
  std::size_t total = 0;
  std::map<std::string, CategoryStats> categories;  // every category
};

// Throws InvalidAnnotations when the list does not validate (span unchecked).
AnnotationStats annotation_stats(const std::vector<Annotation>& anns, const Taxonomy& tax);

nlohmann::json to_json(const AnnotationStats& stats);

std::vector<Annotation> read_annotations(const fs::path& instance_dir);
// Atomic replace of annotations.json.
void write_annotations(const fs::path& instance_dir, const std::vector<Annotation>& anns);

// Length of the union of half-open [start, end) intervals.
std::int64_t union_length(std::vector<std::pair<std::int64_t, std::int64_t>> intervals);

}  // namespace sideseeing
