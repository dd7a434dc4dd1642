#include "sonilab/topo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <set>

#include "sonilab/error.hpp"

namespace sonilab {

namespace {

double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u); }

Vec2 sub(Vec2 a, Vec2 b) { return {a.u - b.u, a.v - b.v}; }
double dot(Vec2 a, Vec2 b) { return a.u * b.u + a.v * b.v; }

// Strictly inside the circumcircle of counter-clockwise (a, b, c).
bool in_circumcircle(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
  const double ax = a.u - p.u, ay = a.v - p.v;
  const double bx = b.u - p.u, by = b.v - p.v;
  const double cx = c.u - p.u, cy = c.v - p.v;
  const double det = (ax * ax + ay * ay) * (bx * cy - cx * by) -
                     (bx * bx + by * by) * (ax * cy - cx * ay) +
                     (cx * cx + cy * cy) * (ax * by - bx * ay);
  return det > 1e-12;
}

std::array<double, 3> barycentric(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  const double area = cross(a, b, c);
  return {cross(p, b, c) / area, cross(a, p, c) / area, cross(a, b, p) / area};
}

}  // namespace

std::vector<Vec2> project_electrodes(std::span<const Vec3> coords3d) {
  std::vector<Vec2> out;
  out.reserve(coords3d.size());
  for (const auto& p : coords3d) {
    const double norm = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
    if (!(norm > 0.0)) throw_data("zero_norm", "cannot project a zero-norm electrode position");
    const double x = p.x / norm, y = p.y / norm, z = p.z / norm;
    const double planar = std::hypot(x, y);
    if (planar == 0.0) {
      // On the axis: the vertex maps to the centre; the antipode has no
      // defined azimuth, so it is placed on +u.
      out.push_back({z > 0 ? 0.0 : std::acos(-1.0), 0.0});
      continue;
    }
    const double rho = std::atan2(planar, z);
    out.push_back({rho * x / planar, rho * y / planar});
  }
  return out;
}

std::vector<Triangle> delaunay(std::span<const Vec2> points) {
  const std::size_t n = points.size();
  if (n < 3) throw_data("degenerate_points", "triangulation needs at least three points");
  double min_u = points[0].u, max_u = points[0].u, min_v = points[0].v, max_v = points[0].v;
  for (const auto& p : points) {
    min_u = std::min(min_u, p.u);
    max_u = std::max(max_u, p.u);
    min_v = std::min(min_v, p.v);
    max_v = std::max(max_v, p.v);
  }
  const double span = std::max(max_u - min_u, max_v - min_v);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::hypot(points[i].u - points[j].u, points[i].v - points[j].v) <= 1e-12 * span)
        throw_data("degenerate_points", "duplicate points in triangulation input");
  bool collinear = true;
  for (std::size_t i = 2; i < n && collinear; ++i)
    for (std::size_t j = 1; j < i && collinear; ++j)
      if (std::abs(cross(points[0], points[j], points[i])) > 1e-12 * span * span) collinear = false;
  if (collinear) throw_data("degenerate_points", "all points are collinear");

  // Bowyer-Watson with a bounding super-triangle.
  std::vector<Vec2> pts(points.begin(), points.end());
  const double cu = 0.5 * (min_u + max_u), cv = 0.5 * (min_v + max_v);
  const double big = 1e3 * span;
  pts.push_back({cu - big, cv - big});
  pts.push_back({cu + big, cv - big});
  pts.push_back({cu, cv + big});
  std::vector<Triangle> tris{{{n, n + 1, n + 2}}};

  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = pts[i];
    std::vector<Triangle> keep;
    std::map<std::pair<std::size_t, std::size_t>, int> edges;
    for (const auto& t : tris) {
      if (in_circumcircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], p)) {
        for (int k = 0; k < 3; ++k) {
          const std::size_t a = t.v[k], b = t.v[(k + 1) % 3];
          edges[{std::min(a, b), std::max(a, b)}]++;
        }
      } else {
        keep.push_back(t);
      }
    }
    for (const auto& t : tris) {
      if (!in_circumcircle(pts[t.v[0]], pts[t.v[1]], pts[t.v[2]], p)) continue;
      for (int k = 0; k < 3; ++k) {
        const std::size_t a = t.v[k], b = t.v[(k + 1) % 3];
        if (edges[{std::min(a, b), std::max(a, b)}] == 1) keep.push_back({{a, b, i}});
      }
    }
    tris = std::move(keep);
  }
  std::vector<Triangle> out;
  for (const auto& t : tris)
    if (t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back(t);
  if (out.empty()) throw_data("degenerate_points", "triangulation produced no triangles");
  return out;
}

CloughTocher::CloughTocher(std::vector<Vec2> points, std::vector<Triangle> triangles,
                           std::vector<double> values)
    : points_(std::move(points)), triangles_(std::move(triangles)), values_(std::move(values)) {
  if (values_.size() != points_.size())
    throw_usage("shape_mismatch", "one value per interpolation node is required");
  for (auto& t : triangles_)
    if (cross(points_[t.v[0]], points_[t.v[1]], points_[t.v[2]]) < 0) std::swap(t.v[1], t.v[2]);
  estimate_gradients();
  build_nets();
}

CloughTocher::CloughTocher(std::vector<Vec2> points, std::vector<double> values)
    : CloughTocher(points, delaunay(points), std::move(values)) {}

void CloughTocher::estimate_gradients() {
  std::vector<std::set<std::size_t>> ring(points_.size());
  for (const auto& t : triangles_)
    for (int k = 0; k < 3; ++k) {
      ring[t.v[k]].insert(t.v[(k + 1) % 3]);
      ring[t.v[k]].insert(t.v[(k + 2) % 3]);
    }
  gradients_.assign(points_.size(), {0.0, 0.0});
  for (std::size_t i = 0; i < points_.size(); ++i) {
    double suu = 0, suv = 0, svv = 0, ru = 0, rv = 0;
    for (std::size_t j : ring[i]) {
      const Vec2 d = sub(points_[j], points_[i]);
      const double df = values_[j] - values_[i];
      suu += d.u * d.u;
      suv += d.u * d.v;
      svv += d.v * d.v;
      ru += d.u * df;
      rv += d.v * df;
    }
    const double det = suu * svv - suv * suv;
    if (std::abs(det) > 1e-300) gradients_[i] = {(svv * ru - suv * rv) / det, (suu * rv - suv * ru) / det};
  }
}

void CloughTocher::build_nets() {
  nets_.clear();
  nets_.reserve(triangles_.size());
  for (const auto& t : triangles_) {
    Net net;
    std::array<Vec2, 3> p;
    for (int a = 0; a < 3; ++a) {
      p[a] = points_[t.v[a]];
      net.f[a] = values_[t.v[a]];
    }
    const Vec2 c{(p[0].u + p[1].u + p[2].u) / 3.0, (p[0].v + p[1].v + p[2].v) / 3.0};
    for (int a = 0; a < 3; ++a) {
      const Vec2 g = gradients_[t.v[a]];
      for (int b = 0; b < 3; ++b)
        if (a != b) net.e[a][b] = net.f[a] + dot(g, sub(p[b], p[a])) / 3.0;
      net.inner[a] = net.f[a] + dot(g, sub(c, p[a])) / 3.0;
    }
    // Middle control point of each outer edge's micro-triangle, chosen so the
    // derivative across the edge varies linearly along it.
    for (int a = 0; a < 3; ++a) {
      const int b = (a + 1) % 3;
      const Vec2 edge = sub(p[b], p[a]);
      Vec2 normal{-edge.v, edge.u};
      if (dot(normal, sub(c, p[a])) < 0) normal = {-normal.u, -normal.v};
      // normal = alpha * (A - C) + beta * (B - C), gamma = -alpha - beta.
      const Vec2 ac = sub(p[a], c), bc = sub(p[b], c);
      const double det = ac.u * bc.v - ac.v * bc.u;
      const double alpha = (normal.u * bc.v - normal.v * bc.u) / det;
      const double beta = (ac.u * normal.v - ac.v * normal.u) / det;
      const double gamma = -alpha - beta;
      const double d20 = alpha * net.f[a] + beta * net.e[a][b] + gamma * net.inner[a];
      const double d02 = alpha * net.e[b][a] + beta * net.f[b] + gamma * net.inner[b];
      net.mid[a] = (0.5 * (d20 + d02) - alpha * net.e[a][b] - beta * net.e[b][a]) / gamma;
    }
    for (int a = 0; a < 3; ++a) net.q[a] = (net.inner[a] + net.mid[a] + net.mid[(a + 2) % 3]) / 3.0;
    net.s = (net.q[0] + net.q[1] + net.q[2]) / 3.0;
    nets_.push_back(net);
  }
}

std::optional<CloughTocher::Location> CloughTocher::locate(Vec2 p) const {
  constexpr double tol = 1e-12;
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    const auto& t = triangles_[i];
    const auto bary = barycentric(p, points_[t.v[0]], points_[t.v[1]], points_[t.v[2]]);
    if (bary[0] >= -tol && bary[1] >= -tol && bary[2] >= -tol) return Location{i, bary};
  }
  return std::nullopt;
}

double CloughTocher::evaluate(const Location& loc) const {
  const Net& net = nets_[loc.triangle];
  const auto& w = loc.bary;
  // Micro-triangle (a, b, centroid) opposite the smallest coordinate.
  int c = 0;
  if (w[1] < w[c]) c = 1;
  if (w[2] < w[c]) c = 2;
  const int a = (c + 1) % 3, b = (c + 2) % 3;
  const double la = w[a] - w[c], lb = w[b] - w[c], lc = 3.0 * w[c];
  const double m_ab = net.mid[a];  // b == a + 1 (mod 3)
  return net.f[a] * la * la * la + net.f[b] * lb * lb * lb + net.s * lc * lc * lc +
         3.0 * (net.e[a][b] * la * la * lb + net.e[b][a] * la * lb * lb +
                net.inner[a] * la * la * lc + net.inner[b] * lb * lb * lc +
                net.q[a] * la * lc * lc + net.q[b] * lb * lc * lc) +
         6.0 * m_ab * la * lb * lc;
}

std::optional<double> CloughTocher::operator()(Vec2 p) const {
  const auto loc = locate(p);
  if (!loc) return std::nullopt;
  return evaluate(*loc);
}

double head_radius(const ChannelLayout& layout) {
  double r = 0.0;
  for (const auto& p : layout.coords2d) r = std::max(r, std::hypot(p.u, p.v));
  return r;
}

Vec2 grid_point(std::size_t row, std::size_t col, std::size_t resolution, double radius) {
  const double cell = 2.0 * radius / static_cast<double>(resolution);
  return {-radius + (static_cast<double>(col) + 0.5) * cell,
          radius - (static_cast<double>(row) + 0.5) * cell};
}

namespace {

// Pixel locations depend only on the layout, so they are computed once.
struct GridPlan {
  std::vector<Vec2> nodes;
  std::vector<Triangle> triangles;
  std::vector<std::optional<CloughTocher::Location>> cells;
  std::vector<std::uint8_t> mask;
};

GridPlan make_plan(const ChannelLayout& layout, std::size_t resolution) {
  GridPlan plan;
  plan.nodes.assign(layout.coords2d.begin(), layout.coords2d.end());
  plan.triangles = delaunay(plan.nodes);
  const CloughTocher locator(plan.nodes, plan.triangles, std::vector<double>(plan.nodes.size(), 0.0));
  const double radius = head_radius(layout);
  for (std::size_t r = 0; r < resolution; ++r)
    for (std::size_t c = 0; c < resolution; ++c) {
      const Vec2 p = grid_point(r, c, resolution, radius);
      const bool inside = p.u * p.u + p.v * p.v <= radius * radius;
      plan.mask.push_back(inside ? 1 : 0);
      plan.cells.push_back(inside ? locator.locate(p) : std::nullopt);
    }
  return plan;
}

bool same_layout(const ChannelLayout& a, const ChannelLayout& b) {
  for (std::size_t i = 0; i < kChannelCount; ++i)
    if (a.coords2d[i].u != b.coords2d[i].u || a.coords2d[i].v != b.coords2d[i].v) return false;
  return true;
}

const GridPlan& cached_plan(const ChannelLayout& layout, std::size_t resolution) {
  static std::mutex mutex;
  static std::vector<std::pair<std::pair<ChannelLayout, std::size_t>, GridPlan>> cache;
  std::lock_guard lock(mutex);
  for (const auto& [key, plan] : cache)
    if (key.second == resolution && same_layout(key.first, layout)) return plan;
  cache.emplace_back(std::make_pair(layout, resolution), make_plan(layout, resolution));
  return cache.back().second;
}

}  // namespace

TopoImage topo_image(std::span<const double> psd, const ChannelLayout& layout, std::size_t resolution) {
  if (psd.size() != kPsdLength) throw_usage("shape_mismatch", "band-power vector must have 70 entries");
  if (resolution == 0) throw_usage("bad_resolution", "grid resolution must be positive");
  const GridPlan& plan = cached_plan(layout, resolution);
  TopoImage img;
  img.resolution = resolution;
  img.mask = plan.mask;
  img.grid.assign(resolution * resolution * kBandCount, 0.0);
  for (std::size_t b = 0; b < kBandCount; ++b) {
    std::vector<double> values(kChannelCount);
    for (std::size_t c = 0; c < kChannelCount; ++c) values[c] = psd[c * kBandCount + b];
    const CloughTocher ct(plan.nodes, plan.triangles, std::move(values));
    for (std::size_t cell = 0; cell < plan.cells.size(); ++cell)
      if (plan.cells[cell]) img.grid[cell * kBandCount + b] = ct.evaluate(*plan.cells[cell]);
  }
  return img;
}

std::vector<double> topo_channels_first(const TopoImage& image) {
  const std::size_t plane = image.resolution * image.resolution;
  std::vector<double> out(plane * kBandCount);
  for (std::size_t cell = 0; cell < plane; ++cell)
    for (std::size_t b = 0; b < kBandCount; ++b) out[b * plane + cell] = image.grid[cell * kBandCount + b];
  return out;
}

}  // namespace sonilab
