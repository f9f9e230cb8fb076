#pragma once

#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pancake/geometry.hpp"

namespace pancake {

/// A point on the unit sphere, in radians. Latitude may reach the poles
/// (spherical triangles need them); the projections reject them.
struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    static GeoPoint from_degrees(double lat_deg, double lon_deg);
    double lat_deg() const { return lat * 180.0 / std::numbers::pi; }
    double lon_deg() const { return lon * 180.0 / std::numbers::pi; }
};

/// Throws DomainError unless |lat| <= pi/2 and |lon| <= pi.
void validate(const GeoPoint& p);

enum class ProjectionKind { Mercator, GallPeters };
const char* to_string(ProjectionKind kind);
ProjectionKind parse_projection(const std::string& name);

struct ProjectionOptions {
    /// Mercator rejects latitudes beyond this (radians); y diverges at the poles.
    double mercator_max_lat = 85.0 * std::numbers::pi / 180.0;
};

/// Mercator: (lon, ln tan(pi/4 + lat/2)). Gall-Peters (cylindrical equal
/// area, standard parallels 45 degrees): (lon/sqrt2, sqrt2 sin lat). Unit
/// sphere. Throws DomainError at or beyond the poles, or past the Mercator
/// latitude limit.
Point2 project(ProjectionKind kind, const GeoPoint& p, const ProjectionOptions& options = {});

/// Partial derivatives of project with respect to (lon, lat).
struct Jacobian {
    double dx_dlon = 0.0, dx_dlat = 0.0;
    double dy_dlon = 0.0, dy_dlat = 0.0;

    double det() const { return dx_dlon * dy_dlat - dx_dlat * dy_dlon; }
};

Jacobian jacobian(ProjectionKind kind, const GeoPoint& p, const ProjectionOptions& options = {});

struct DistortionReport {
    double conformality_defect = 0.0;  // sigma1/sigma2 - 1 of the metric-corrected Jacobian
    double area_defect = 0.0;          // | |det J| / (k cos lat) - 1 |
};

/// Area scale k of the projection at the equator (1 for both bundled ones).
double area_constant(ProjectionKind kind);

DistortionReport distortion_report(ProjectionKind kind, const GeoPoint& p,
                                   const ProjectionOptions& options = {});

/// Singular values (largest first) of a 2x2 matrix, computed without the
/// cancellation of the characteristic-polynomial route.
std::pair<double, double> singular_values(double a, double b, double c, double d);

/// Inserts great-circle points so no edge of the closed ring spans more
/// than max_step radians.
std::vector<GeoPoint> densify(std::span<const GeoPoint> ring, double max_step);

constexpr double kDensifyStep = 0.5 * std::numbers::pi / 180.0;

/// Planar shoelace area of the projected ring after densifying its edges
/// to 0.5 degree steps.
double region_map_area(ProjectionKind kind, std::span<const GeoPoint> ring,
                       const ProjectionOptions& options = {});

/// Area on the unit sphere of a simple counterclockwise ring, from its
/// interior angles (angle sum minus (n - 2) pi).
double spherical_polygon_area(std::span<const GeoPoint> ring);

/// Sum of the interior angles of the spherical triangle abc, in radians.
/// Throws DomainError when the three points lie on one great circle.
double spherical_triangle_angle_sum(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c);

struct DistortionSample {
    double lon_deg = 0.0;
    double lat_deg = 0.0;
    DistortionReport report;
};

/// Distortion at every grid node lon in [-180, 180), lat in [-max_lat,
/// max_lat], spaced step_deg apart.
std::vector<DistortionSample> distortion_grid(ProjectionKind kind, double step_deg, double max_lat_deg,
                                              const ProjectionOptions& options = {});

}  // namespace pancake
