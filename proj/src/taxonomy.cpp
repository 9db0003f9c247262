#include "sideseeing/taxonomy.hpp"

#include <algorithm>
#include <set>

#include "sideseeing/error.hpp"
#include "util.hpp"

namespace sideseeing {

using nlohmann::json;

Taxonomy::Taxonomy(std::vector<TaxonomyCategory> categories, std::map<std::string, std::string> aliases)
    : categories_(std::move(categories)), aliases_(std::move(aliases)) {}

std::size_t Taxonomy::leaf_count() const {
  std::size_t n = 0;
  for (const auto& c : categories_) n += c.elements.size();
  return n;
}

const TaxonomyCategory* Taxonomy::category(const std::string& name) const {
  for (const auto& c : categories_) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::optional<std::string> Taxonomy::resolve(const std::string& category_name,
                                             const std::string& element) const {
  const auto* c = category(category_name);
  if (!c) return std::nullopt;
  std::string leaf = element;
  if (auto it = aliases_.find(element); it != aliases_.end()) leaf = it->second;
  if (std::find(c->elements.begin(), c->elements.end(), leaf) == c->elements.end()) {
    return std::nullopt;
  }
  return leaf;
}

std::vector<std::string> Taxonomy::lines() const {
  std::vector<std::string> out;
  for (const auto& c : categories_) {
    for (const auto& e : c.elements) out.push_back(c.name + "/" + e);
  }
  return out;
}

std::uint64_t Taxonomy::checksum() const {
  std::uint64_t h = detail::kFnvOffset;
  for (const auto& line : lines()) {
    h = detail::fnv1a(line, h);
    h = detail::fnv1a("\n", h);
  }
  return h;
}

std::string Taxonomy::checksum_hex() const { return detail::to_hex(checksum()); }

json Taxonomy::to_json() const {
  json cats = json::array();
  for (const auto& c : categories_) cats.push_back({{"name", c.name}, {"elements", c.elements}});
  json aliases = json::object();
  for (const auto& [alias, leaf] : aliases_) aliases[alias] = leaf;
  return {{"categories", cats},
          {"leaf_count", leaf_count()},
          {"aliases", aliases},
          {"checksum", checksum_hex()}};
}

const Taxonomy& load_taxonomy() {
  // Leaf spellings are kept exactly as published, including "Trunck".
  static const Taxonomy taxonomy(
      {
          {"Adjacent road type", {"Motorway / highway", "None", "Residential", "Service"}},
          {"Obstacles",
           {"Aerial vegetation", "Barrier", "Bench", "Bike rack", "Black ice", "Bus stop",
            "Car barrier", "Construction material", "Dirt", "Fence", "Fire hydrant",
            "Floor standing board", "Garage entrance", "Ground light", "Ground vegetation",
            "Manhole cover", "Newsstand", "Parked vehicle", "Parking booth", "Person", "Pole",
            "Potted plant", "Puddle", "Rock", "Snow", "Telephone booth", "Traffic cone",
            "Transit sign", "Trash can", "Tree leaves", "Trunck", "Water channel",
            "Water fountain"}},
          {"Pavement condition", {"Broken", "Corrugation", "Cracked", "Detached", "Patching", "Pothole"}},
          {"Sidewalk geometry", {"Height difference", "Narrow", "Steep"}},
          {"Sidewalk structure",
           {"Bioswale", "Curb ramp", "Footbridge", "Friction strip", "Grate", "Ramp", "Stairs",
            "Tactile paving"}},
          {"Surface type",
           {"Asphalt", "Bluestone", "Brick", "Coating", "Cobblestone", "Concrete",
            "Concrete with aggregates", "Grass", "Gravel", "Large pavers", "Red brick", "Slab",
            "Stone pavement", "Tiles"}},
      },
      {{"Trunk", "Trunck"}});
  return taxonomy;
}

// ---------------------------------------------------------------------------

json to_json(const Annotation& a) {
  return {{"id", a.id},
          {"instance_id", a.instance_id},
          {"t_start_ms", a.t_start_ms},
          {"t_end_ms", a.t_end_ms},
          {"category", a.category},
          {"element", a.element},
          {"note", a.note},
          {"author", a.author},
          {"created_at", a.created_at}};
}

json to_json(const std::vector<Annotation>& anns) {
  json out = json::array();
  for (const auto& a : anns) out.push_back(to_json(a));
  return out;
}

Annotation annotation_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::MalformedJson, "annotation must be an object");
  Annotation a;
  try {
    a.id = doc.at("id").get<std::string>();
    a.instance_id = doc.value("instance_id", std::string());
    a.t_start_ms = doc.at("t_start_ms").get<std::int64_t>();
    a.t_end_ms = doc.at("t_end_ms").get<std::int64_t>();
    a.category = doc.at("category").get<std::string>();
    a.element = doc.at("element").get<std::string>();
    a.note = doc.value("note", std::string());
    a.author = doc.value("author", std::string());
    a.created_at = doc.value("created_at", std::int64_t{0});
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  return a;
}

std::vector<Annotation> annotations_from_json(const json& doc) {
  if (!doc.is_array()) throw Error(ErrorCode::MalformedJson, "annotations must be a JSON array");
  std::vector<Annotation> out;
  for (const auto& item : doc) out.push_back(annotation_from_json(item));
  return out;
}

ValidationReport validate_annotations(const std::vector<Annotation>& anns, const Instance* inst,
                                      const Taxonomy& tax) {
  ValidationReport report;
  auto add = [&](const Annotation& a, std::string code, const std::string& message) {
    report.push_back({Severity::Error, std::move(code), "annotation '" + a.id + "': " + message});
  };
  std::set<std::string> seen;
  for (const auto& a : anns) {
    if (a.id.empty()) {
      add(a, "id.empty", "id must not be empty");
    } else if (!seen.insert(a.id).second) {
      add(a, "id.duplicate", "id is not unique");
    }
    if (!(a.t_start_ms < a.t_end_ms)) {
      add(a, "interval.invalid", "t_end_ms must be greater than t_start_ms");
    } else if (inst && (a.t_start_ms < inst->metadata.start_epoch_ms ||
                        a.t_end_ms > inst->metadata.stop_epoch_ms)) {
      add(a, "interval.out_of_span", "interval lies outside the instance span");
    }
    if (!tax.resolve(a.category, a.element)) {
      add(a, "taxonomy.mismatch",
          "'" + a.category + "/" + a.element + "' is not an element of the taxonomy");
    }
    if (inst && !a.instance_id.empty() && a.instance_id != inst->metadata.instance_id) {
      add(a, "instance.mismatch", "annotation belongs to instance '" + a.instance_id + "'");
    }
  }
  return report;
}

std::int64_t union_length(std::vector<std::pair<std::int64_t, std::int64_t>> intervals) {
  std::sort(intervals.begin(), intervals.end());
  std::int64_t total = 0;
  std::int64_t cur_start = 0, cur_end = 0;
  bool open = false;
  for (const auto& [a, b] : intervals) {
    if (b <= a) continue;
    if (open && a <= cur_end) {
      cur_end = std::max(cur_end, b);
    } else {
      if (open) total += cur_end - cur_start;
      cur_start = a;
      cur_end = b;
      open = true;
    }
  }
  if (open) total += cur_end - cur_start;
  return total;
}

AnnotationStats annotation_stats(const std::vector<Annotation>& anns, const Taxonomy& tax) {
  const auto report = validate_annotations(anns, nullptr, tax);
  if (!report.empty()) {
    throw Error(ErrorCode::InvalidAnnotations,
                std::to_string(report.size()) + " finding(s), first: " + report.front().code);
  }
  AnnotationStats stats;
  stats.total = anns.size();
  std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> per_leaf, per_category;
  for (const auto& c : tax.categories()) {
    auto& cs = stats.categories[c.name];
    for (const auto& e : c.elements) cs.leaves[e];
  }
  for (const auto& a : anns) {
    const auto leaf = *tax.resolve(a.category, a.element);
    auto& cs = stats.categories[a.category];
    cs.count += 1;
    cs.leaves[leaf].count += 1;
    per_leaf[a.category + "/" + leaf].emplace_back(a.t_start_ms, a.t_end_ms);
    per_category[a.category].emplace_back(a.t_start_ms, a.t_end_ms);
  }
  for (auto& [cat, cs] : stats.categories) {
    cs.covered_ms = union_length(per_category[cat]);
    for (auto& [leaf, ls] : cs.leaves) ls.covered_ms = union_length(per_leaf[cat + "/" + leaf]);
  }
  return stats;
}

json to_json(const AnnotationStats& stats) {
  json cats = json::object();
  for (const auto& [name, cs] : stats.categories) {
    json leaves = json::object();
    for (const auto& [leaf, ls] : cs.leaves) {
      leaves[leaf] = {{"count", ls.count}, {"covered_ms", ls.covered_ms}};
    }
    cats[name] = {{"count", cs.count}, {"covered_ms", cs.covered_ms}, {"leaves", leaves}};
  }
  return {{"total", stats.total}, {"categories", cats}};
}

std::vector<Annotation> read_annotations(const fs::path& instance_dir) {
  const auto path = instance_dir / files::kAnnotations;
  if (!fs::is_regular_file(path)) return {};
  try {
    return annotations_from_json(json::parse(detail::read_file(path)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, path.string() + ": " + e.what());
  }
}

void write_annotations(const fs::path& instance_dir, const std::vector<Annotation>& anns) {
  detail::write_file_atomic(instance_dir / files::kAnnotations, to_json(anns).dump(2) + "\n");
}

}  // namespace sideseeing
