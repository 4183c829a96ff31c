#include "toric/operators.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace toric {

namespace {

void put(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "NaN";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

std::string field_csv(const ScalarField& field) {
  std::string out = "xi1,xi2,value\n";
  const GridSpec& g = field.grid;
  if (field.values.empty()) return out;
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j) {
      const Vec2 p = g.node(i, j);
      put(out, p.x());
      out += ',';
      put(out, p.y());
      out += ',';
      put(out, field.values[g.flat(i, j)]);
      out += '\n';
    }
  return out;
}

void write_field_csv(const ScalarField& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DomainError("cannot write field file '" + path + "'");
  os << field_csv(field);
  if (!os) throw DomainError("write failed for '" + path + "'");
}

}  // namespace toric
