#pragma once

#include <yaml-cpp/yaml.h>

#include <initializer_list>
#include <string>
#include <vector>

#include "rcwbc/errors.hpp"
#include "rcwbc/model.hpp"

namespace rcwbc::yaml {

inline int line_of(const YAML::Node& n) { return n.Mark().is_null() ? -1 : n.Mark().line; }

inline YAML::Node parse_document(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ParseError("malformed document: " + e.msg, e.mark.is_null() ? -1 : e.mark.line);
  }
}

inline void require_map(const YAML::Node& n, const std::string& ctx) {
  if (!n.IsMap()) throw ParseError(ctx + ": expected a mapping", line_of(n));
}

inline void require_sequence(const YAML::Node& n, const std::string& ctx) {
  if (!n.IsSequence()) throw ParseError(ctx + ": expected a list", line_of(n));
}

inline void check_keys(const YAML::Node& n, std::initializer_list<const char*> allowed, const std::string& ctx) {
  require_map(n, ctx);
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ParseError(ctx + ": unknown key '" + key + "'", line_of(kv.first));
  }
}

inline YAML::Node require(const YAML::Node& n, const char* key, const std::string& ctx) {
  require_map(n, ctx);
  YAML::Node v = n[key];
  if (!v) throw ParseError(ctx + ": missing field '" + key + "'", line_of(n));
  return v;
}

template <typename T>
T as(const YAML::Node& n, const std::string& ctx) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(ctx + ": wrong value type", line_of(n));
  }
}

inline double as_double(const YAML::Node& n, const std::string& ctx) {
  if (!n.IsScalar()) throw ParseError(ctx + ": expected a number", line_of(n));
  return as<double>(n, ctx);
}

inline std::string as_string(const YAML::Node& n, const std::string& ctx) {
  if (!n.IsScalar()) throw ParseError(ctx + ": expected a string", line_of(n));
  return n.Scalar();
}

inline std::vector<double> as_doubles(const YAML::Node& n, const std::string& ctx, int expected = -1) {
  require_sequence(n, ctx);
  if (expected >= 0 && static_cast<int>(n.size()) != expected)
    throw ParseError(ctx + ": expected " + std::to_string(expected) + " numbers", line_of(n));
  std::vector<double> out;
  for (const auto& e : n) out.push_back(as_double(e, ctx));
  return out;
}

inline Vector3 as_vec3(const YAML::Node& n, const std::string& ctx) {
  const auto d = as_doubles(n, ctx, 3);
  return {d[0], d[1], d[2]};
}

inline Interval as_interval(const YAML::Node& n, const std::string& ctx) {
  const auto d = as_doubles(n, ctx, 2);
  return {d[0], d[1]};
}

inline Matrix3 as_mat3(const YAML::Node& n, const std::string& ctx) {
  require_sequence(n, ctx);
  if (n.size() != 3) throw ParseError(ctx + ": expected a 3x3 matrix", line_of(n));
  Matrix3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = as_vec3(n[r], ctx).transpose();
  return m;
}

/// Optional `{xyz, rpy | rotation}`.
inline Transform as_transform(const YAML::Node& n, const std::string& ctx) {
  Transform t;
  if (!n) return t;
  check_keys(n, {"xyz", "rpy", "rotation"}, ctx);
  if (n["xyz"]) t.translation = as_vec3(n["xyz"], ctx + ".xyz");
  if (n["rpy"] && n["rotation"]) throw ParseError(ctx + ": give either rpy or rotation", line_of(n));
  if (n["rpy"]) t.rotation = rotation_from_rpy(as_vec3(n["rpy"], ctx + ".rpy"));
  if (n["rotation"]) t.rotation = as_mat3(n["rotation"], ctx + ".rotation");
  return t;
}

// Emission.
inline void emit_vec(YAML::Emitter& e, const double* d, int n) {
  e << YAML::Flow << YAML::BeginSeq;
  for (int i = 0; i < n; ++i) e << d[i];
  e << YAML::EndSeq;
}
inline void emit_vec3(YAML::Emitter& e, const Vector3& v) { emit_vec(e, v.data(), 3); }
inline void emit_interval(YAML::Emitter& e, const Interval& iv) {
  const double d[2] = {iv.lower, iv.upper};
  emit_vec(e, d, 2);
}
inline void emit_mat3(YAML::Emitter& e, const Matrix3& m) {
  e << YAML::BeginSeq;
  for (int r = 0; r < 3; ++r) {
    const Vector3 row = m.row(r).transpose();
    emit_vec3(e, row);
  }
  e << YAML::EndSeq;
}
inline void emit_transform(YAML::Emitter& e, const Transform& t) {
  e << YAML::BeginMap;
  e << YAML::Key << "xyz" << YAML::Value;
  emit_vec3(e, t.translation);
  if (!t.rotation.isIdentity(0.0)) {
    e << YAML::Key << "rotation" << YAML::Value;
    emit_mat3(e, t.rotation);
  }
  e << YAML::EndMap;
}

}  // namespace rcwbc::yaml
