// SPDX-License-Identifier: Apache-2.0
#include "nvs/scenegen.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace nvs {

namespace {

constexpr double kHitEpsilon = 1e-9;

double frac(double x) { return x - std::floor(x); }

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  const float f = static_cast<float>(t);
  return a * (1.0f - f) + b * f;
}

// splitmix64 finalizer, used to derive independent phases and seeds.
uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double unit_from_bits(uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

struct Hit {
  double t = 0.0;
  double s = 0.0;  // surface coordinates for texturing
  double u = 0.0;
};

std::optional<Hit> intersect_plane(const Primitive& p, const Vec3& c, const Ray& ray) {
  const Vec3 n = p.normal.normalized();
  const double denom = n.dot(ray.direction);
  if (std::fabs(denom) < 1e-12) return std::nullopt;
  const double t = n.dot(c - ray.origin) / denom;
  if (!(t > kHitEpsilon)) return std::nullopt;
  const Vec3 q = ray.origin + t * ray.direction - c;
  const Vec3 a = p.u_axis.normalized();
  const Vec3 b = n.cross(a);
  const double s = q.dot(a);
  const double u = q.dot(b);
  if (std::fabs(s) > p.half_size.x() || std::fabs(u) > p.half_size.y()) return std::nullopt;
  return Hit{t, s, u};
}

std::optional<Hit> intersect_sphere(const Primitive& p, const Vec3& c, const Ray& ray) {
  const Vec3 oc = ray.origin - c;
  const double b = oc.dot(ray.direction);
  const double cc = oc.squaredNorm() - p.radius * p.radius;
  const double disc = b * b - cc;
  if (disc < 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  double t = -b - root;
  if (!(t > kHitEpsilon)) t = -b + root;
  if (!(t > kHitEpsilon)) return std::nullopt;
  const Vec3 q = ray.origin + t * ray.direction - c;
  const double s = p.radius * std::atan2(q.x(), -q.z());
  const double u = p.radius * std::asin(std::clamp(q.y() / p.radius, -1.0, 1.0));
  return Hit{t, s, u};
}

std::optional<Hit> intersect_box(const Primitive& p, const Vec3& c, const Ray& ray) {
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const double lo = c[i] - p.half_size[i];
    const double hi = c[i] + p.half_size[i];
    if (std::fabs(ray.direction[i]) < 1e-15) {
      if (ray.origin[i] < lo || ray.origin[i] > hi) return std::nullopt;
      continue;
    }
    double a = (lo - ray.origin[i]) / ray.direction[i];
    double b = (hi - ray.origin[i]) / ray.direction[i];
    if (a > b) std::swap(a, b);
    t0 = std::max(t0, a);
    t1 = std::min(t1, b);
  }
  if (t0 > t1) return std::nullopt;
  const double t = t0 > kHitEpsilon ? t0 : t1;
  if (!(t > kHitEpsilon)) return std::nullopt;
  // Texture coordinates from the two axes orthogonal to the hit face.
  const Vec3 q = ray.origin + t * ray.direction - c;
  int face = 0;
  double best = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double r = std::fabs(q[i]) / p.half_size[i];
    if (r > best) {
      best = r;
      face = i;
    }
  }
  const int a = (face + 1) % 3;
  const int b = (face + 2) % 3;
  return Hit{t, q[a], q[b]};
}

std::optional<Hit> intersect(const Primitive& p, const Ray& ray, double seconds) {
  const Vec3 c = p.center_at(seconds);
  switch (p.kind) {
    case PrimitiveKind::kPlane:
      return intersect_plane(p, c, ray);
    case PrimitiveKind::kSphere:
      return intersect_sphere(p, c, ray);
    case PrimitiveKind::kBox:
      return intersect_box(p, c, ray);
  }
  return std::nullopt;
}

}  // namespace

Rgb Texture::eval(double s, double t) const {
  switch (kind) {
    case TextureKind::kSolid:
      return color_a;
    case TextureKind::kChecker: {
      const long parity = static_cast<long>(std::floor(s / scale)) + static_cast<long>(std::floor(t / scale));
      return (parity & 1) ? color_b : color_a;
    }
    case TextureKind::kGradient:
      return lerp(color_a, color_b, frac(s / scale));
    case TextureKind::kSmooth: {
      const double two_pi = 2.0 * std::numbers::pi;
      const double p1 = two_pi * unit_from_bits(mix(seed));
      const double p2 = two_pi * unit_from_bits(mix(seed + 1));
      const double v = 0.5 + 0.25 * std::sin(two_pi * s / scale + p1) +
                       0.25 * std::cos(two_pi * t / scale + p2);
      return lerp(color_a, color_b, v);
    }
  }
  return color_a;
}

void Primitive::validate() const {
  if (!center.allFinite() || !velocity.allFinite()) {
    throw std::invalid_argument("primitive: non-finite center or velocity");
  }
  if (!(texture.scale > 0.0)) throw std::invalid_argument("primitive: texture scale must be positive");
  switch (kind) {
    case PrimitiveKind::kPlane:
      if (!(normal.norm() > 1e-9) || !(u_axis.norm() > 1e-9)) {
        throw std::invalid_argument("plane: degenerate normal or axis");
      }
      if (std::fabs(normal.normalized().dot(u_axis.normalized())) > 1e-6) {
        throw std::invalid_argument("plane: u_axis must be orthogonal to the normal");
      }
      if (!(half_size.x() > 0.0 && half_size.y() > 0.0)) {
        throw std::invalid_argument("plane: half extents must be positive");
      }
      break;
    case PrimitiveKind::kSphere:
      if (!(radius > 0.0)) throw std::invalid_argument("sphere: radius must be positive");
      break;
    case PrimitiveKind::kBox:
      if (!(half_size.minCoeff() > 0.0)) throw std::invalid_argument("box: half extents must be positive");
      break;
  }
}

void SceneSpec::validate() const {
  if (rig.empty()) throw std::invalid_argument("scene: camera rig is empty");
  if (frames < 1) throw std::invalid_argument("scene: frames must be >= 1");
  if (!(fps > 0.0)) throw std::invalid_argument("scene: fps must be positive");
  for (const Primitive& p : primitives) p.validate();
  for (const NamedCamera& c : rig) c.camera.validate();
}

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("noise: sigma must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("noise: dropout must be in [0, 1)");
}

std::optional<double> intersect_scene(const SceneSpec& spec, const Ray& ray, double seconds,
                                      Rgb* color) {
  std::optional<double> best;
  for (const Primitive& p : spec.primitives) {
    const auto hit = intersect(p, ray, seconds);
    if (!hit || (best && hit->t >= *best)) continue;
    best = hit->t;
    if (color) *color = p.texture.eval(hit->s, hit->u);
  }
  return best;
}

RenderedFrame render_scene(const SceneSpec& spec, const Camera& cam, int frame) {
  if (frame < 0 || frame >= spec.frames) throw std::out_of_range("render_scene: frame out of range");
  cam.validate();
  const double seconds = frame / spec.fps;
  RenderedFrame out{ColorImage(cam.width, cam.height),
                    ScalarMap(cam.width, cam.height, MapKind::kDepth)};
#pragma omp parallel for schedule(static)
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const Ray ray = ray_for_pixel(cam, x + 0.5, y + 0.5);
      Rgb color;
      const auto t = intersect_scene(spec, ray, seconds, &color);
      if (!t) continue;
      const Vec3 p = ray.origin + *t * ray.direction;
      const double z = (cam.rotation * p + cam.translation).z();
      if (!(z > 0.0)) continue;
      out.color.at(x, y) = color.clamped();
      out.depth.at(x, y) = static_cast<float>(z);
    }
  }
  return out;
}

ScalarMap add_noise(const ScalarMap& depth, const NoiseSpec& noise, uint64_t stream) {
  noise.validate();
  ScalarMap out = depth;
  if (noise.sigma == 0.0 && noise.dropout == 0.0) return out;
  std::mt19937_64 rng(mix(noise.seed ^ mix(stream)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (size_t i = 0; i < out.size(); ++i) {
    if (!valid_depth(out[i])) continue;
    // Draw both variates for every valid pixel so the noise pattern does not
    // depend on the dropout setting.
    const double n = gauss(rng);
    const double u = uniform(rng);
    if (u < noise.dropout) {
      out[i] = kInvalidDepth;
      continue;
    }
    if (noise.sigma > 0.0) out[i] = static_cast<float>(std::max(out[i] + noise.sigma * n, 1e-6));
  }
  return out;
}

Aabb scene_bounds(const SceneSpec& spec, int frame) {
  Aabb box;
  const double seconds = frame / spec.fps;
  for (const Primitive& p : spec.primitives) {
    const Vec3 c = p.center_at(seconds);
    switch (p.kind) {
      case PrimitiveKind::kPlane: {
        const Vec3 a = p.u_axis.normalized() * p.half_size.x();
        const Vec3 b = p.normal.normalized().cross(p.u_axis.normalized()) * p.half_size.y();
        for (int sa = -1; sa <= 1; sa += 2) {
          for (int sb = -1; sb <= 1; sb += 2) box.extend(c + sa * a + sb * b);
        }
        break;
      }
      case PrimitiveKind::kSphere:
        box.extend(c - Vec3::Constant(p.radius));
        box.extend(c + Vec3::Constant(p.radius));
        break;
      case PrimitiveKind::kBox:
        box.extend(c - p.half_size);
        box.extend(c + p.half_size);
        break;
    }
  }
  return box;
}

namespace {

nlohmann::json vec_json(const Vec3& v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument(std::string(what) + ": expected an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

nlohmann::json rgb_json(const Rgb& c) { return nlohmann::json::array({c.r, c.g, c.b}); }

Rgb rgb_from(const nlohmann::json& j, const char* what) {
  const Vec3 v = vec_from(j, what);
  return Rgb{static_cast<float>(v.x()), static_cast<float>(v.y()), static_cast<float>(v.z())};
}

const char* texture_name(TextureKind k) {
  switch (k) {
    case TextureKind::kSolid:
      return "solid";
    case TextureKind::kChecker:
      return "checker";
    case TextureKind::kGradient:
      return "gradient";
    case TextureKind::kSmooth:
      return "smooth";
  }
  return "checker";
}

TextureKind texture_from(const std::string& s) {
  if (s == "solid") return TextureKind::kSolid;
  if (s == "checker") return TextureKind::kChecker;
  if (s == "gradient") return TextureKind::kGradient;
  if (s == "smooth") return TextureKind::kSmooth;
  throw std::invalid_argument("unknown texture kind '" + s + "'");
}

const char* primitive_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::kPlane:
      return "plane";
    case PrimitiveKind::kSphere:
      return "sphere";
    case PrimitiveKind::kBox:
      return "box";
  }
  return "plane";
}

PrimitiveKind primitive_from(const std::string& s) {
  if (s == "plane") return PrimitiveKind::kPlane;
  if (s == "sphere") return PrimitiveKind::kSphere;
  if (s == "box") return PrimitiveKind::kBox;
  throw std::invalid_argument("unknown primitive type '" + s + "'");
}

}  // namespace

nlohmann::json scene_to_json(const SceneSpec& spec) {
  nlohmann::json prims = nlohmann::json::array();
  for (const Primitive& p : spec.primitives) {
    nlohmann::json j;
    j["type"] = primitive_name(p.kind);
    j["center"] = vec_json(p.center);
    j["velocity"] = vec_json(p.velocity);
    switch (p.kind) {
      case PrimitiveKind::kPlane:
        j["normal"] = vec_json(p.normal);
        j["u_axis"] = vec_json(p.u_axis);
        j["half_size"] = nlohmann::json::array({p.half_size.x(), p.half_size.y()});
        break;
      case PrimitiveKind::kSphere:
        j["radius"] = p.radius;
        break;
      case PrimitiveKind::kBox:
        j["half_size"] = vec_json(p.half_size);
        break;
    }
    j["texture"] = {{"kind", texture_name(p.texture.kind)},
                    {"color_a", rgb_json(p.texture.color_a)},
                    {"color_b", rgb_json(p.texture.color_b)},
                    {"scale", p.texture.scale},
                    {"seed", p.texture.seed}};
    prims.push_back(std::move(j));
  }
  nlohmann::json rig = nlohmann::json::array();
  for (const NamedCamera& c : spec.rig) rig.push_back(camera_to_json(c));
  return {{"primitives", prims}, {"cameras", rig}, {"frames", spec.frames}, {"fps", spec.fps}};
}

SceneSpec scene_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  for (const auto& pj : j.at("primitives")) {
    Primitive p;
    p.kind = primitive_from(pj.at("type").get<std::string>());
    p.center = vec_from(pj.at("center"), "center");
    if (pj.contains("velocity")) p.velocity = vec_from(pj.at("velocity"), "velocity");
    switch (p.kind) {
      case PrimitiveKind::kPlane: {
        p.normal = vec_from(pj.at("normal"), "normal");
        p.u_axis = vec_from(pj.at("u_axis"), "u_axis");
        const auto& hs = pj.at("half_size");
        if (!hs.is_array() || hs.size() != 2) throw std::invalid_argument("plane half_size: expected 2 numbers");
        p.half_size = Vec3(hs[0].get<double>(), hs[1].get<double>(), 0.0);
        break;
      }
      case PrimitiveKind::kSphere:
        p.radius = pj.at("radius").get<double>();
        break;
      case PrimitiveKind::kBox:
        p.half_size = vec_from(pj.at("half_size"), "half_size");
        break;
    }
    if (pj.contains("texture")) {
      const auto& tj = pj.at("texture");
      p.texture.kind = texture_from(tj.value("kind", std::string("checker")));
      if (tj.contains("color_a")) p.texture.color_a = rgb_from(tj.at("color_a"), "color_a");
      if (tj.contains("color_b")) p.texture.color_b = rgb_from(tj.at("color_b"), "color_b");
      p.texture.scale = tj.value("scale", p.texture.scale);
      p.texture.seed = tj.value("seed", p.texture.seed);
    }
    spec.primitives.push_back(p);
  }
  for (const auto& cj : j.at("cameras")) {
    if (!cj.contains("eye")) {
      spec.rig.push_back(camera_from_json(cj));
      continue;
    }
    // Hand-written shorthand: eye / look_at / up instead of a pose matrix.
    const int w = cj.at("width").get<int>();
    const int h = cj.at("height").get<int>();
    const double fx = cj.at("fx").get<double>();
    const double fy = cj.value("fy", fx);
    const Vec3 up = cj.contains("up") ? vec_from(cj.at("up"), "up") : Vec3(0, 1, 0);
    Camera cam = look_at_camera(vec_from(cj.at("eye"), "eye"), vec_from(cj.at("look_at"), "look_at"), up,
                                fx, fy, w, h);
    spec.rig.push_back({cj.at("id").get<std::string>(), cam});
  }
  spec.frames = j.value("frames", 1);
  spec.fps = j.value("fps", 30.0);
  spec.validate();
  return spec;
}

SceneSpec read_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene file " + path.string());
  try {
    return scene_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_scene(const SceneSpec& spec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scene file " + path.string());
  out << scene_to_json(spec).dump(2) << '\n';
}

nlohmann::json noise_to_json(const NoiseSpec& n) {
  return {{"sigma", n.sigma}, {"dropout", n.dropout}, {"seed", n.seed}};
}

NoiseSpec noise_from_json(const nlohmann::json& j) {
  NoiseSpec n;
  n.sigma = j.value("sigma", 0.0);
  n.dropout = j.value("dropout", 0.0);
  n.seed = j.value("seed", uint64_t{0});
  n.validate();
  return n;
}

}  // namespace nvs
