#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <optional>

#include "CLI11.hpp"
#include "pancake/districting.hpp"
#include "pancake/errors.hpp"
#include "pancake/geometry.hpp"
#include "pancake/ham_sandwich.hpp"
#include "pancake/io.hpp"
#include "pancake/projections.hpp"

namespace pancake::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kOutDirEnv = "PANCAKE_OUT_DIR";

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Point2 parse_pair(const std::string& text, const std::string& flag) {
    const std::size_t comma = text.find(',');
    try {
        if (comma == std::string::npos) throw std::invalid_argument("no comma");
        std::size_t used = 0;
        const std::string first = text.substr(0, comma), second = text.substr(comma + 1);
        const double x = std::stod(first, &used);
        if (used != first.size()) throw std::invalid_argument("trailing");
        const double y = std::stod(second, &used);
        if (used != second.size()) throw std::invalid_argument("trailing");
        if (!std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("not finite");
        return {x, y};
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "expected two numbers as X,Y, got '" + text + "'");
    }
}

const CLI::Validator kPair(
    [](std::string& s) {
        parse_pair(s, "");
        return std::string();
    },
    "X,Y");

MetricKind parse_metric(const std::string& name) {
    if (name == "l2" || name == "euclidean") return MetricKind::Euclidean;
    if (name == "l1" || name == "manhattan") return MetricKind::Manhattan;
    throw CLI::ValidationError("--metric", "unknown metric '" + name + "' (l1, l2)");
}

// Flag values from a config file (key = flag name), placed ahead of the
// real arguments; the last value wins, so the command line overrides. Keys in a section
// named after the subcommand apply too. The output directory is left to
// the environment when PANCAKE_OUT_DIR is set.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::optional<std::string> path;
    std::vector<std::string> rest;
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) {
            path = args[++k];
        } else if (args[k].rfind("--config=", 0) == 0) {
            path = args[k].substr(9);
        } else {
            rest.push_back(args[k]);
        }
    }
    if (!path) return rest;
    if (rest.empty() || rest.front().rfind("-", 0) == 0) {
        throw CLI::ValidationError("--config", "a config file needs a subcommand before it");
    }
    if (!fs::exists(*path)) throw IoError("cannot read config file " + *path);
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigTOML().from_file(*path);
    } catch (const CLI::ParseError& e) {
        throw IoError("config file " + *path + ": " + e.what());
    }

    const std::string sub = rest.front();
    std::vector<std::string> injected{sub};
    for (const auto& item : items) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub)) continue;
        const std::string flag = "--" + item.name;
        if (item.name == "out-dir" && std::getenv(kOutDirEnv) != nullptr) continue;
        if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
            if (item.inputs[0] == "true") injected.push_back(flag);
            continue;
        }
        for (const auto& v : item.inputs) {
            injected.push_back(flag);
            injected.push_back(v);
        }
    }
    injected.insert(injected.end(), rest.begin() + 1, rest.end());
    return injected;
}

struct Options {
    // zone
    std::string center = "0,0", point;
    double radius = 0.0;
    std::string metric = "l2";
    // populations and runs
    std::string population, region;
    std::uint64_t seed = 0;
    double eps_on = 0.0;
    std::size_t depth = 0;
    std::size_t districts = 1;
    std::string strategy = "index";
    double deviation_cap = 0.0;
    bool min_depth = false;
    std::string out_dir = ".";
    std::string name;
    std::string dump;
    bool all = false;
    // project
    std::string input;
    std::string kind = "both";
    double grid_step = 5.0;
    double max_lat = 85.0;
    // triangle
    std::string a, b, c;
};

fs::path output_path(const Options& o, const std::string& file) { return fs::path(o.out_dir) / file; }

int cmd_zone(const Options& o, std::ostream& out) {
    if (!(o.radius > 0.0) || !std::isfinite(o.radius)) {
        throw CLI::ValidationError("--radius", "must be a positive number");
    }
    const Point2 center = parse_pair(o.center, "--center");
    const Point2 p = parse_pair(o.point, "--point");
    const MetricKind metric = parse_metric(o.metric);
    const bool inside = zone_contains(center, o.radius, metric, p);
    out << "l2=" << fixed(l2_distance(center, p), 2) << " l1=" << fixed(l1_distance(center, p), 2) << ' '
        << (inside ? "INSIDE" : "OUTSIDE") << '\n';
    return inside ? kOk : kNegative;
}

int cmd_cut(const Options& o, std::ostream& out) {
    const auto points = read_population(o.population);
    if (points.size() < 2) throw DomainError("a cut needs at least two points");
    const CutSolverOptions opts{o.seed, o.eps_on};
    const OrientedCut cut = find_cut(points, opts);
    const CutBalanceReport r = verify_cut(points, cut, o.eps_on);
    if (!r.balanced) throw InvariantViolation("solver returned an unbalanced cut");
    out << "line " << fixed(cut.line.a(), 12) << "*x + " << fixed(cut.line.b(), 12)
        << "*y = " << fixed(cut.line.c(), 12) << '\n';
    out << "A " << r.pos_total << "/" << r.neg_total << "  B " << r.pos_subpop << "/" << r.neg_subpop
        << "  (positive/negative)\n";
    for (const auto& [k, side] : cut.on_line_assignment) {
        out << "point " << k << " on the line, counted " << to_string(side) << '\n';
    }
    if (o.all) out << balanced_cuts(points, opts).size() << " balanced candidate line(s)\n";
    return kOk;
}

void check_districts(std::size_t depth, std::size_t n) {
    if (depth > 20) throw SizeError("depth " + std::to_string(depth) + " exceeds 20");
    if (n < 1) throw CLI::ValidationError("--districts", "must be at least 1");
    if (n > (std::size_t{1} << depth)) {
        throw CLI::ValidationError("--districts", std::to_string(n) + " districts need at least " +
                                                      std::to_string(n) + " cells, depth " +
                                                      std::to_string(depth) + " gives " +
                                                      std::to_string(std::size_t{1} << depth));
    }
}

void print_population(std::ostream& out, const char* label, const PopulationDeviation& d) {
    out << label << ": total " << d.total << ", mean " << fixed(d.mean, 3) << ", max deviation "
        << fixed(d.max_abs, 3) << " (" << fixed(100.0 * d.max_rel, 2) << "%), bound " << fixed(d.bound, 3)
        << (d.within_bound ? ", within bound" : ", EXCEEDS bound") << '\n';
}

int cmd_district(const Options& o, std::ostream& out, std::ostream& err) {
    check_districts(o.depth, o.districts);
    const GroupingStrategy strategy = parse_grouping_strategy(o.strategy);
    const auto points = read_population(o.population);
    const SimplePolygon region = read_region(o.region);
    const BisectOptions bopts{o.seed, o.eps_on};

    BisectionTree tree = recursive_bisect(region, points, o.depth, bopts);
    DistrictPlan plan;
    if (o.min_depth) {
        const auto found = contiguous_min_depth(region, points, o.districts, o.deviation_cap, o.depth, bopts);
        if (!found) {
            out << "no contiguous plan within " << fixed(100.0 * o.deviation_cap, 2)
                << "% deviation up to depth " << o.depth << '\n';
            return kNegative;
        }
        tree = tree.truncated(found->depth);
        plan = found->plan;
        out << "contiguous plan found at depth " << found->depth << '\n';
    } else {
        plan = group_cells(tree, o.districts, strategy);
    }
    const PlanAudit audit = audit_plan(tree, plan, points);
    for (const auto& w : tree.warnings) err << "warning: " << w << '\n';

    const std::string stem = o.name.empty() ? "plan" : o.name;
    const AuditContext ctx{o.seed, o.min_depth ? "contiguous" : to_string(strategy), o.population, o.region};
    write_text(output_path(o, stem + ".geojson"), plan_geojson(tree, plan));
    write_text(output_path(o, stem + "_audit.json"), audit_json(tree, plan, audit, ctx));
    write_text(output_path(o, stem + ".svg"), plan_svg(tree, plan, points));

    out << "depth " << tree.depth << ", " << tree.leaf_count() << " cells, " << plan.size()
        << " district(s)\n";
    for (std::size_t d = 0; d < plan.size(); ++d) {
        out << "district " << d << ": A " << audit.a_counts[d] << ", B " << audit.b_counts[d]
            << (audit.shapes[d].connected ? ", connected" : ", disconnected") << '\n';
    }
    print_population(out, "A", audit.a);
    print_population(out, "B", audit.b);
    out << "wrote " << output_path(o, stem + ".geojson").string() << ", "
        << output_path(o, stem + "_audit.json").string() << ", " << output_path(o, stem + ".svg").string()
        << '\n';
    if (!audit.sizes_ok || !audit.a.within_bound || !audit.b.within_bound) {
        throw InvariantViolation("plan audit failed the deviation bound");
    }
    return kOk;
}

int cmd_enumerate(const Options& o, std::ostream& out) {
    check_districts(o.depth, o.districts);
    const auto points = read_population(o.population);
    std::optional<SimplePolygon> region;
    if (!o.region.empty()) {
        region = read_region(o.region);
    } else {
        BBox box = BBox::empty();
        for (const auto& p : points) box.expand(p.location);
        if (box.is_empty()) box.expand(Point2{0, 0});
        region = SimplePolygon::rectangle(box.min - Point2{1, 1}, box.max + Point2{1, 1});
    }
    const auto outcomes = enumerate_outcomes(*region, points, o.districts, o.depth);
    out << outcomes.size() << (outcomes.size() == 1 ? " outcome" : " outcomes") << '\n';
    if (!o.dump.empty()) {
        write_text(output_path(o, o.dump), outcomes_text(outcomes));
        out << "wrote " << output_path(o, o.dump).string() << '\n';
    }
    return kOk;
}

int cmd_project(const Options& o, std::ostream& out) {
    if (!(o.grid_step > 0.0)) throw CLI::ValidationError("--grid-step", "must be positive");
    if (!(o.max_lat > 0.0 && o.max_lat < 90.0)) throw CLI::ValidationError("--max-lat", "must be in (0, 90)");
    std::vector<ProjectionKind> kinds;
    if (o.kind == "both") {
        kinds = {ProjectionKind::GallPeters, ProjectionKind::Mercator};
    } else {
        kinds = {parse_projection(o.kind)};
    }
    const std::string text = read_text(o.input);
    std::vector<GeoRegion> regions;
    try {
        regions = parse_geo_regions(text);
    } catch (const ParseError& e) {
        throw ParseError(o.input + ": " + e.what(), e.offset());
    } catch (const IoError& e) {
        throw IoError(o.input + ": " + e.what());
    }
    const ProjectionOptions popts{o.max_lat * std::numbers::pi / 180.0};
    const std::string stem = o.name.empty() ? fs::path(o.input).stem().string() : o.name;

    for (ProjectionKind kind : kinds) {
        std::vector<double> areas;
        for (const auto& r : regions) {
            try {
                areas.push_back(region_map_area(kind, r.ring, popts));
            } catch (const DomainError& e) {
                throw DomainError(r.name + " under " + to_string(kind) + ": " + e.what());
            }
            out << to_string(kind) << ' ' << r.name << ": map area " << fixed(areas.back(), 6)
                << ", sphere area " << fixed(spherical_polygon_area(r.ring), 6) << '\n';
        }
        if (regions.size() >= 2) {
            out << to_string(kind) << " area ratio " << regions[0].name << "/" << regions[1].name << " = "
                << fixed(areas[0] / areas[1], 4) << '\n';
        }
        const std::string base = stem + "_" + to_string(kind);
        write_text(output_path(o, base + ".geojson"), projected_geojson(kind, regions, popts));
        write_text(output_path(o, base + "_distortion.csv"),
                   distortion_csv(distortion_grid(kind, o.grid_step, o.max_lat, popts)));
        write_text(output_path(o, base + ".svg"), projection_svg(kind, regions, popts));
        out << "wrote " << output_path(o, base + ".geojson").string() << ", "
            << output_path(o, base + "_distortion.csv").string() << ", "
            << output_path(o, base + ".svg").string() << '\n';
    }
    return kOk;
}

int cmd_triangle(const Options& o, std::ostream& out) {
    GeoPoint v[3];
    const std::string* text[3] = {&o.a, &o.b, &o.c};
    const char* flags[3] = {"--a", "--b", "--c"};
    for (int k = 0; k < 3; ++k) {
        const Point2 p = parse_pair(*text[k], flags[k]);
        v[k] = GeoPoint::from_degrees(p.x, p.y);
    }
    const double sum = spherical_triangle_angle_sum(v[0], v[1], v[2]);
    out << "angle sum " << fixed(sum * 180.0 / std::numbers::pi, 9) << " deg, excess "
        << fixed(sum - std::numbers::pi, 12) << " sr\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pancake-cut districting, metric zones and map projection distortion"};
    app.name("pancake");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.add_option("--config", "Config file of flag = value lines, placed after the subcommand");
    Options o;

    auto* zone = app.add_subcommand("zone", "Is a point within a radius of a center, under l1 or l2?");
    zone->add_option("--center", o.center, "Center as X,Y")->check(kPair)->capture_default_str();
    zone->add_option("--radius", o.radius, "Zone radius")->required();
    zone->add_option("--metric", o.metric, "l1 or l2")->capture_default_str();
    zone->add_option("--point", o.point, "Query point as X,Y")->required()->check(kPair);

    auto population_flags = [&](CLI::App* sub) {
        sub->add_option("--population", o.population, "Population CSV (x,y,subpop) or GeoJSON")->required();
        sub->add_option("--seed", o.seed, "Perturbation seed")->capture_default_str();
        sub->add_option("--eps-on", o.eps_on, "Treat residuals this small as on a line")
            ->check(CLI::NonNegativeNumber)
            ->capture_default_str();
    };
    auto output_flags = [&](CLI::App* sub) {
        sub->add_option("--out-dir", o.out_dir, "Output directory")->envname(kOutDirEnv)->capture_default_str();
        sub->add_option("--name", o.name, "Output file stem");
    };

    auto* cut = app.add_subcommand("cut", "One line halving both populations");
    population_flags(cut);
    cut->add_flag("--all", o.all, "Also count every balanced candidate line");

    auto* district = app.add_subcommand("district", "Recursive bisection plus grouping into districts");
    population_flags(district);
    output_flags(district);
    district->add_option("--region", o.region, "Region GeoJSON polygon")->required();
    district->add_option("--depth,-i", o.depth, "Bisection depth i (2^i cells)")->capture_default_str();
    district->add_option("--districts,-n", o.districts, "Number of districts n")->capture_default_str();
    district->add_option("--strategy", o.strategy, "index, greedy or exhaustive")->capture_default_str();
    district->add_flag("--min-depth", o.min_depth,
                       "Search the smallest depth up to --depth with connected districts");
    district->add_option("--deviation-cap", o.deviation_cap, "Relative deviation cap for --min-depth")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();

    auto* enumerate = app.add_subcommand("enumerate", "Count distinct districting outcomes");
    enumerate->add_option("--population", o.population, "Population CSV or GeoJSON")->required();
    enumerate->add_option("--region", o.region, "Region GeoJSON (default: padded bounding box)");
    enumerate->add_option("--depth,-i", o.depth, "Bisection depth i")->capture_default_str();
    enumerate->add_option("--districts,-n", o.districts, "Number of districts n")->capture_default_str();
    enumerate->add_option("--dump", o.dump, "Write every distinct outcome to this file");
    enumerate->add_option("--out-dir", o.out_dir, "Output directory")->envname(kOutDirEnv)->capture_default_str();

    auto* project = app.add_subcommand("project", "Project regions and measure distortion");
    project->add_option("--input", o.input, "Region GeoJSON in longitude/latitude degrees")->required();
    project->add_option("--kind", o.kind, "mercator, gall-peters or both")->capture_default_str();
    project->add_option("--grid-step", o.grid_step, "Distortion grid spacing, degrees")->capture_default_str();
    project->add_option("--max-lat", o.max_lat, "Mercator latitude limit and grid extent, degrees")
        ->capture_default_str();
    output_flags(project);

    auto* triangle = app.add_subcommand("triangle", "Angle sum of a spherical triangle");
    triangle->add_option("--a", o.a, "Vertex as LAT,LON degrees")->required()->check(kPair);
    triangle->add_option("--b", o.b, "Vertex as LAT,LON degrees")->required()->check(kPair);
    triangle->add_option("--c", o.c, "Vertex as LAT,LON degrees")->required()->check(kPair);

    try {
        std::vector<std::string> args = expand_config(raw_args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
        if (zone->parsed()) return cmd_zone(o, out);
        if (cut->parsed()) return cmd_cut(o, out);
        if (district->parsed()) return cmd_district(o, out, err);
        if (enumerate->parsed()) return cmd_enumerate(o, out);
        if (project->parsed()) return cmd_project(o, out);
        if (triangle->parsed()) return cmd_triangle(o, out);
        return kUsage;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    } catch (const SizeError& e) {
        err << "size cap: " << e.what() << "\n(desk-scale caps: at most " << kEnumerationPointCap
            << " points and " << kEnumerationLeafCap << " cells for enumeration, depth 20 for bisection)\n";
        return kSizeCap;
    } catch (const InvariantViolation& e) {
        err << "invariant violation: " << e.what() << '\n';
        return kInvariant;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
}

}  // namespace pancake::cli
