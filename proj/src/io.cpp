#include "qnls/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "qnls/errors.hpp"

namespace qnls {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 8> kMagic{'Q', 'N', 'L', 'S', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Fnv1a {
  std::uint64_t h = 14695981039346656037ULL;
  void add(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  }
  void add(double v) { add(&v, sizeof v); }
};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& is, const fs::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ParseError("checkpoint " + path.string() + " is truncated");
  }
  return v;
}

}  // namespace

void write_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  write_atomic(path, doc.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingArtifacts("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

std::string diagnostics_csv(const DiagnosticsSeries& series) {
  std::ostringstream os;
  os << "t,sup_u,sup_u_t,sup_u_tlogt,ledger,ledger_drift_rel,phi,logt_sqrtphi,logt2_phi,r_sup,"
        "xnorm_ms0,xnorm_m0s\n";
  for (const auto& r : series.rows) {
    os << fmt(r.t) << ',' << fmt(r.sup_u) << ',' << fmt(r.sup_u_t) << ',' << fmt(r.sup_u_tlogt)
       << ',' << fmt(r.ledger) << ',' << fmt(r.ledger_drift_rel) << ',' << fmt(r.phi) << ','
       << fmt(r.logt_sqrtphi) << ',' << fmt(r.logt2_phi) << ',' << fmt(r.r_sup) << ','
       << fmt(r.xnorm_ms0) << ',' << fmt(r.xnorm_m0s) << '\n';
  }
  return os.str();
}

std::string profile_csv(const std::vector<ProfileState>& trajectory, const SystemParams& p) {
  std::ostringstream os;
  os << "tau,re_a1,im_a1,re_a2,im_a2,re_a3,im_a3,nu_A,tau_nu_A,tau2_phi\n";
  for (const auto& st : trajectory) {
    const double nu = nu_A(st.alpha, p);
    os << fmt(st.tau);
    for (int j = 0; j < 3; ++j) os << ',' << fmt(st.alpha[j].real()) << ',' << fmt(st.alpha[j].imag());
    os << ',' << fmt(nu) << ',' << fmt(st.tau * nu) << ',' << fmt(st.tau * st.tau * nu * nu) << '\n';
  }
  return os.str();
}

std::uint64_t params_hash(const SystemParams& p) {
  Fnv1a h;
  for (int j = 0; j < 3; ++j) {
    h.add(p.m()[j]);
    h.add(p.lambda()[j].real());
    h.add(p.lambda()[j].imag());
    h.add(p.mu()[j].real());
    h.add(p.mu()[j].imag());
    h.add(p.kappa()[j]);
  }
  h.add(p.s());
  h.add(p.gamma());
  return h.h;
}

void write_checkpoint(const fs::path& path, const FieldState& state, const SystemParams& p) {
  std::ostringstream os(std::ios::binary);
  os.write(kMagic.data(), kMagic.size());
  put(os, kVersion);
  put(os, static_cast<std::uint32_t>(state.grid.n()));
  put(os, state.grid.box_length());
  put(os, state.t);
  put(os, params_hash(p));
  for (const auto& comp : state.u) {
    os.write(reinterpret_cast<const char*>(comp.data()),
             static_cast<std::streamsize>(comp.size() * sizeof(cplx)));
  }
  write_atomic(path, os.str());
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifacts("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw ParseError(path.string() + " is not a checkpoint file");
  }
  const auto version = take<std::uint32_t>(in, path);
  if (version != kVersion) {
    throw ParseError("checkpoint " + path.string() + " has unsupported version " +
                     std::to_string(version));
  }
  const auto n = take<std::uint32_t>(in, path);
  const auto box = take<double>(in, path);
  const auto t = take<double>(in, path);
  const auto hash = take<std::uint64_t>(in, path);
  Grid2D grid(n, box);
  Checkpoint ck{FieldState::zeros(grid, t), hash};
  for (auto& comp : ck.state.u) {
    const auto bytes = static_cast<std::streamsize>(comp.size() * sizeof(cplx));
    if (!in.read(reinterpret_cast<char*>(comp.data()), bytes)) {
      throw ParseError("checkpoint " + path.string() + " is truncated");
    }
  }
  ck.state.validate();
  return ck;
}

}  // namespace qnls
