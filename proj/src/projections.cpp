#include "pancake/projections.hpp"

#include <array>
#include <cmath>
#include <string>

#include "pancake/errors.hpp"

namespace pancake {

namespace {

using std::numbers::pi;
using std::numbers::sqrt2;

using Vec3 = std::array<double, 3>;

Vec3 to_unit(const GeoPoint& p) {
    return {std::cos(p.lat) * std::cos(p.lon), std::cos(p.lat) * std::sin(p.lon), std::sin(p.lat)};
}

GeoPoint from_unit(const Vec3& v) {
    return {std::atan2(v[2], std::hypot(v[0], v[1])), std::atan2(v[1], v[0])};
}

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

double central_angle(const Vec3& a, const Vec3& b) { return std::atan2(norm3(cross3(a, b)), dot3(a, b)); }

// Direction of the great circle from p towards q, tangent at p.
Vec3 tangent(const Vec3& p, const Vec3& q) { return cross3(cross3(p, q), p); }

void check_projectable(ProjectionKind kind, const GeoPoint& p, const ProjectionOptions& options) {
    validate(p);
    if (std::abs(p.lat) >= pi / 2) {
        throw DomainError("latitude " + std::to_string(p.lat_deg()) + " is at a pole");
    }
    if (kind == ProjectionKind::Mercator && std::abs(p.lat) > options.mercator_max_lat) {
        throw DomainError("latitude " + std::to_string(p.lat_deg()) +
                          " is beyond the Mercator limit of " +
                          std::to_string(options.mercator_max_lat * 180.0 / pi) + " degrees");
    }
}

}  // namespace

GeoPoint GeoPoint::from_degrees(double lat_deg, double lon_deg) {
    return {lat_deg * pi / 180.0, lon_deg * pi / 180.0};
}

void validate(const GeoPoint& p) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || std::abs(p.lat) > pi / 2 ||
        std::abs(p.lon) > pi) {
        throw DomainError("geographic point out of range: lat " + std::to_string(p.lat_deg()) +
                          ", lon " + std::to_string(p.lon_deg()));
    }
}

const char* to_string(ProjectionKind kind) {
    return kind == ProjectionKind::Mercator ? "mercator" : "gall-peters";
}

ProjectionKind parse_projection(const std::string& name) {
    if (name == "mercator") return ProjectionKind::Mercator;
    if (name == "gall-peters" || name == "gallpeters" || name == "peters") {
        return ProjectionKind::GallPeters;
    }
    throw DomainError("unknown projection '" + name + "' (mercator, gall-peters)");
}

Point2 project(ProjectionKind kind, const GeoPoint& p, const ProjectionOptions& options) {
    check_projectable(kind, p, options);
    if (kind == ProjectionKind::Mercator) return {p.lon, std::log(std::tan(pi / 4 + p.lat / 2))};
    return {p.lon / sqrt2, sqrt2 * std::sin(p.lat)};
}

Jacobian jacobian(ProjectionKind kind, const GeoPoint& p, const ProjectionOptions& options) {
    check_projectable(kind, p, options);
    if (kind == ProjectionKind::Mercator) return {1.0, 0.0, 0.0, 1.0 / std::cos(p.lat)};
    return {1.0 / sqrt2, 0.0, 0.0, sqrt2 * std::cos(p.lat)};
}

double area_constant(ProjectionKind) { return 1.0; }

std::pair<double, double> singular_values(double a, double b, double c, double d) {
    const double e = 0.5 * (a + d), f = 0.5 * (a - d);
    const double g = 0.5 * (c + b), h = 0.5 * (c - b);
    const double q = std::hypot(e, h), r = std::hypot(f, g);
    return {q + r, std::abs(q - r)};
}

DistortionReport distortion_report(ProjectionKind kind, const GeoPoint& p,
                                   const ProjectionOptions& options) {
    const Jacobian j = jacobian(kind, p, options);
    const double c = std::cos(p.lat);
    // Unit east and north steps on the sphere are dlon = 1/cos(lat), dlat = 1.
    const auto [s1, s2] = singular_values(j.dx_dlon / c, j.dx_dlat, j.dy_dlon / c, j.dy_dlat);
    DistortionReport r;
    r.conformality_defect = s2 > 0.0 ? s1 / s2 - 1.0 : INFINITY;
    r.area_defect = std::abs(std::abs(j.det()) / (area_constant(kind) * c) - 1.0);
    return r;
}

std::vector<GeoPoint> densify(std::span<const GeoPoint> ring, double max_step) {
    if (!(max_step > 0.0)) throw DomainError("densify step must be positive");
    std::vector<GeoPoint> out;
    for (std::size_t k = 0; k < ring.size(); ++k) {
        const GeoPoint& p = ring[k];
        const GeoPoint& q = ring[(k + 1) % ring.size()];
        validate(p);
        out.push_back(p);
        const Vec3 a = to_unit(p), b = to_unit(q);
        const double omega = central_angle(a, b);
        const auto steps = static_cast<std::size_t>(std::ceil(omega / max_step));
        if (steps <= 1 || std::sin(omega) == 0.0) continue;
        for (std::size_t s = 1; s < steps; ++s) {
            const double t = static_cast<double>(s) / static_cast<double>(steps);
            const double wa = std::sin((1.0 - t) * omega) / std::sin(omega);
            const double wb = std::sin(t * omega) / std::sin(omega);
            out.push_back(from_unit({wa * a[0] + wb * b[0], wa * a[1] + wb * b[1], wa * a[2] + wb * b[2]}));
        }
    }
    return out;
}

double region_map_area(ProjectionKind kind, std::span<const GeoPoint> ring,
                       const ProjectionOptions& options) {
    if (ring.size() < 3) throw DomainError("region needs at least three vertices");
    for (std::size_t k = 0; k < ring.size(); ++k) {
        try {
            check_projectable(kind, ring[k], options);
        } catch (const DomainError& e) {
            throw DomainError("region vertex " + std::to_string(k) + ": " + e.what());
        }
    }
    std::vector<Point2> planar;
    for (const GeoPoint& g : densify(ring, kDensifyStep)) planar.push_back(project(kind, g, options));
    return std::abs(signed_area(planar));
}

double spherical_polygon_area(std::span<const GeoPoint> ring) {
    const std::size_t n = ring.size();
    if (n < 3) throw DomainError("spherical polygon needs at least three vertices");
    std::vector<Vec3> v;
    for (const auto& g : ring) {
        validate(g);
        v.push_back(to_unit(g));
    }
    double angles = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3& p = v[k];
        const Vec3 to_next = tangent(p, v[(k + 1) % n]);
        const Vec3 to_prev = tangent(p, v[(k + n - 1) % n]);
        // Interior lies to the left of travel: sweep counterclockwise about p
        // from the outgoing edge to the incoming one.
        double a = std::atan2(dot3(p, cross3(to_next, to_prev)), dot3(to_next, to_prev));
        if (a < 0.0) a += 2 * pi;
        angles += a;
    }
    return angles - static_cast<double>(n - 2) * pi;
}

double spherical_triangle_angle_sum(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
    const std::array<Vec3, 3> v{to_unit(a), to_unit(b), to_unit(c)};
    for (const auto& g : {a, b, c}) validate(g);
    if (std::abs(dot3(v[0], cross3(v[1], v[2]))) < 1e-15) {
        throw DomainError("triangle vertices lie on one great circle");
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const Vec3 t1 = tangent(v[k], v[(k + 1) % 3]);
        const Vec3 t2 = tangent(v[k], v[(k + 2) % 3]);
        sum += std::atan2(norm3(cross3(t1, t2)), dot3(t1, t2));
    }
    return sum;
}

std::vector<DistortionSample> distortion_grid(ProjectionKind kind, double step_deg, double max_lat_deg,
                                              const ProjectionOptions& options) {
    if (!(step_deg > 0.0)) throw DomainError("grid step must be positive");
    std::vector<DistortionSample> out;
    const auto lat_steps = static_cast<long>(std::floor(max_lat_deg / step_deg + 1e-9));
    const auto lon_steps = static_cast<long>(std::ceil(360.0 / step_deg - 1e-9));
    for (long i = -lat_steps; i <= lat_steps; ++i) {
        for (long j = 0; j < lon_steps; ++j) {
            const double lat = static_cast<double>(i) * step_deg;
            const double lon = -180.0 + static_cast<double>(j) * step_deg;
            out.push_back({lon, lat, distortion_report(kind, GeoPoint::from_degrees(lat, lon), options)});
        }
    }
    return out;
}

}  // namespace pancake
