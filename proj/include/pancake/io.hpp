#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pancake/districting.hpp"
#include "pancake/ham_sandwich.hpp"
#include "pancake/projections.hpp"

namespace pancake {

/// A file could not be read, written or parsed.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `offset` is the 0-based byte position of the problem.
class ParseError : public IoError {
public:
    ParseError(const std::string& what, std::size_t offset) : IoError(what), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

std::string read_text(const std::filesystem::path& path);
/// Creates missing parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);

/// CSV with header x,y,subpop. subpop is 0/1 or true/false.
std::vector<PopulationPoint> parse_population_csv(std::string_view text);
std::string population_csv(std::span<const PopulationPoint> points);

/// Point features (or a single MultiPoint) with a boolean "subpop" property.
std::vector<PopulationPoint> parse_population_geojson(std::string_view text);

/// Chooses the format by extension: .geojson/.json, anything else is CSV.
std::vector<PopulationPoint> read_population(const std::filesystem::path& path);

/// A planar region: the only Polygon in a geometry, Feature or
/// FeatureCollection. Interior rings are rejected.
SimplePolygon parse_region_geojson(std::string_view text);
SimplePolygon read_region(const std::filesystem::path& path);

struct GeoRegion {
    std::string name;
    std::vector<GeoPoint> ring;  // open, as given (closing vertex dropped)
};

/// Polygon features in longitude/latitude degrees. Names come from the
/// "name" property, or "region k".
std::vector<GeoRegion> parse_geo_regions(std::string_view text);

/// FeatureCollection with one MultiPolygon feature per district, ordered by
/// district_id, properties district_id, a_count, b_count, point_indices.
/// Rings are closed and counterclockwise.
std::string plan_geojson(const BisectionTree& tree, const DistrictPlan& plan);

/// Point membership per district, indexed by district_id.
std::vector<std::vector<std::size_t>> read_plan_membership(std::string_view geojson);

struct AuditContext {
    std::uint64_t seed = 0;
    std::string strategy;
    std::string population_path;
    std::string region_path;
};

std::string audit_json(const BisectionTree& tree, const DistrictPlan& plan, const PlanAudit& audit,
                       const AuditContext& context);

/// Leaf cells outlined and filled by district from a 12-color palette, cuts
/// dashed, population dots (subpopulation darker).
std::string plan_svg(const BisectionTree& tree, const DistrictPlan& plan,
                     std::span<const PopulationPoint> points);

/// Regions projected with densified edges, one Polygon feature each, with
/// "name" and "map_area" properties.
std::string projected_geojson(ProjectionKind kind, std::span<const GeoRegion> regions,
                              const ProjectionOptions& options = {});

/// Region outlines plus a 30 degree graticule.
std::string projection_svg(ProjectionKind kind, std::span<const GeoRegion> regions,
                           const ProjectionOptions& options = {});

/// Header lon_deg,lat_deg,conformality_defect,area_defect.
std::string distortion_csv(std::span<const DistortionSample> samples);

/// One line per outcome: districts separated by " | ", indices by spaces.
std::string outcomes_text(std::span<const Outcome> outcomes);

}  // namespace pancake
