#include "hardball/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hardball {

using nlohmann::json;

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

json ball_rows(const std::vector<double>& flat, int dim) {
  json rows = json::array();
  for (std::size_t b = 0; b * dim < flat.size(); ++b)
    rows.push_back(std::vector<double>(flat.begin() + b * dim, flat.begin() + (b + 1) * dim));
  return rows;
}

std::vector<double> flatten_rows(const json& rows, int n_balls, int dim, const char* field) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != n_balls)
    throw Error(ErrorCode::Schema, std::string("event field '") + field + "' must list every ball");
  std::vector<double> out;
  for (const auto& r : rows) {
    if (!r.is_array() || static_cast<int>(r.size()) != dim)
      throw Error(ErrorCode::Schema, std::string("event field '") + field + "' has a row of wrong length");
    for (const auto& x : r) out.push_back(x.get<double>());
  }
  return out;
}

std::string cell(std::optional<int> v) { return v ? std::to_string(*v) : "NA"; }

std::string join_masses(const std::vector<double>& m) {
  std::string out;
  for (std::size_t k = 0; k < m.size(); ++k) out += (k ? ";" : "") + format_real(m[k]);
  return out;
}

void write_metadata(std::ostream& out, const char* schema, const Metadata& metadata) {
  out << "# schema=" << schema << "\n";
  for (const auto& [k, v] : metadata) out << "# " << k << "=" << v << "\n";
}

}  // namespace

json event_to_json(const CollisionEvent& e, int dim) {
  json j;
  j["k"] = e.index;
  j["t"] = e.time;
  j["i"] = e.i + 1;
  j["j"] = e.j + 1;
  j["a"] = e.adjustment;
  j["pre"] = ball_rows(e.pre_velocities, dim);
  j["post"] = ball_rows(e.post_velocities, dim);
  j["normal"] = e.impact_normal;
  j["residue"] = e.contact_residue;
  return j;
}

CollisionEvent event_from_json(const json& r, int n_balls, int dim) {
  try {
    CollisionEvent e;
    e.index = r.at("k").get<std::int64_t>();
    e.time = r.at("t").get<double>();
    e.i = r.at("i").get<int>() - 1;
    e.j = r.at("j").get<int>() - 1;
    if (e.i < 0 || e.j <= e.i || e.j >= n_balls) throw Error(ErrorCode::Schema, "event has an invalid ball pair");
    e.adjustment = r.at("a").get<Lattice>();
    if (static_cast<int>(e.adjustment.size()) != dim) throw Error(ErrorCode::Schema, "adjustment vector of wrong length");
    e.pre_velocities = flatten_rows(r.at("pre"), n_balls, dim, "pre");
    e.post_velocities = flatten_rows(r.at("post"), n_balls, dim, "post");
    e.impact_normal = r.at("normal").get<std::vector<double>>();
    e.contact_residue = r.at("residue").get<double>();
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::Schema, std::string("malformed event record: ") + ex.what());
  }
}

void write_events(std::ostream& out, const OrbitSegment& seg) {
  for (const auto& e : seg.events) out << event_to_json(e, seg.params.dim).dump() << "\n";
}

std::vector<CollisionEvent> read_events(std::istream& in, int n_balls, int dim) {
  std::vector<CollisionEvent> out;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    json r;
    try {
      r = json::parse(line);
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::Schema, std::string("event line is not JSON: ") + ex.what());
    }
    out.push_back(event_from_json(r, n_balls, dim));
  }
  return out;
}

json params_to_json(const SystemParams& p) {
  return json{{"n_balls", p.n_balls},
              {"dim", p.dim},
              {"torus_side", p.torus_side},
              {"radius", p.radius},
              {"masses", p.masses},
              {"allow_zero_mass", p.allow_zero_mass}};
}

void write_spectrum(std::ostream& out, const Spectrum& s, const Metadata& metadata) {
  write_metadata(out, kSpectrumSchema, metadata);
  out << "index\tlambda\tconvergence_estimate\n";
  for (std::size_t k = 0; k < s.exponents.size(); ++k)
    out << k + 1 << "\t" << format_real(s.exponents[k]) << "\t" << format_real(s.convergence[k]) << "\n";
}

Table read_table(std::istream& in) {
  Table t;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      key.erase(0, key.find_first_not_of(' '));
      t.metadata[key] = line.substr(eq + 1);
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string c; std::getline(row, c, '\t');) cells.push_back(c);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size()) throw Error(ErrorCode::Schema, "table row has the wrong number of cells");
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

SpectrumTable read_spectrum(std::istream& in) {
  Table t = read_table(in);
  if (t.metadata["schema"] != kSpectrumSchema) throw Error(ErrorCode::Schema, "not a spectrum table");
  if (t.header != std::vector<std::string>{"index", "lambda", "convergence_estimate"})
    throw Error(ErrorCode::Schema, "unexpected spectrum columns");
  SpectrumTable out;
  out.metadata = t.metadata;
  for (const auto& r : t.rows) {
    out.lambda.push_back(std::stod(r[1]));
    out.convergence.push_back(std::stod(r[2]));
  }
  return out;
}

SurveyAggregate aggregate_survey(const std::vector<SurveyRow>& rows, long long min_richness) {
  SurveyAggregate a;
  a.min_richness = min_richness;
  for (const auto& r : rows) {
    ++a.seeds;
    if (!r.analysis) {
      ++a.failed;
      continue;
    }
    if (!r.analysis->methods_agree) a.tainted = true;
    if (r.analysis->sufficient) ++a.sufficient;
    if (r.analysis->scheme.richness >= min_richness) {
      ++a.rich;
      if (r.analysis->sufficient) ++a.rich_sufficient;
    }
  }
  return a;
}

json aggregate_to_json(const SurveyAggregate& a) {
  return json{{"seeds", a.seeds},
              {"failed", a.failed},
              {"min_richness", a.min_richness},
              {"rich", a.rich},
              {"rich_sufficient", a.rich_sufficient},
              {"sufficient", a.sufficient},
              {"tainted", a.tainted}};
}

void write_survey(std::ostream& out, const std::vector<SurveyRow>& rows, const SurveyAggregate& a,
                  const Metadata& metadata) {
  write_metadata(out, kSurveySchema, metadata);
  out << "seed\tstatus\tmasses\tn\tp_sigma\trichness\trich\tproperty_a\tdim_direct\tdim_cpf\tdim_jacobian"
         "\tdim_endpoint\tdim_alpha\tequations\tsufficient\tmethods_agree\tcpf_residual\tadvance_residual\n";
  for (const auto& r : rows) {
    out << r.seed << "\t" << r.status << "\t" << join_masses(r.masses);
    if (!r.analysis) {
      for (int k = 0; k < 15; ++k) out << "\tNA";
      out << "\n";
      continue;
    }
    const auto& s = *r.analysis;
    out << "\t" << s.scheme.n << "\t" << s.scheme.p_sigma << "\t" << s.scheme.richness << "\t" << r.rich() << "\t"
        << s.scheme.property_a << "\t" << s.dim_direct << "\t" << s.dim_cpf << "\t" << cell(s.dim_jacobian) << "\t"
        << cell(s.dim_endpoint) << "\t" << s.dim_alpha << "\t" << s.equations << "\t" << s.sufficient << "\t"
        << s.methods_agree << "\t" << format_real(s.cpf_residual) << "\t" << format_real(s.advance_residual) << "\n";
  }
  out << "# aggregate.seeds=" << a.seeds << "\n";
  out << "# aggregate.failed=" << a.failed << "\n";
  out << "# aggregate.min_richness=" << a.min_richness << "\n";
  out << "# aggregate.rich=" << a.rich << "\n";
  out << "# aggregate.rich_sufficient=" << a.rich_sufficient << "\n";
  out << "# aggregate.tainted=" << a.tainted << "\n";
}

void write_richness(std::ostream& out, const std::vector<RichnessRow>& rows, const Metadata& metadata) {
  write_metadata(out, kRichnessSchema, metadata);
  out << "seed\tstatus\tn\tp_sigma\trichness\trequirement\trich\tproperty_a\tviolation_k\tviolation_l\n";
  for (const auto& r : rows) {
    out << r.seed << "\t" << r.status;
    if (!r.summary) {
      out << "\tNA\tNA\tNA\t" << r.requirement << "\tNA\tNA\tNA\tNA\n";
      continue;
    }
    out << "\t" << r.summary->n << "\t" << r.summary->p_sigma << "\t" << r.summary->richness << "\t" << r.requirement
        << "\t" << (r.summary->richness >= r.requirement) << "\t" << r.summary->property_a << "\t"
        << (r.violation ? std::to_string(r.violation->k) : "NA") << "\t"
        << (r.violation ? std::to_string(r.violation->l) : "NA") << "\n";
  }
}

void write_json_file(const std::string& path, const json& value) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Config, "cannot write '" + path + "'");
  out << value.dump(2) << "\n";
}

}  // namespace hardball
