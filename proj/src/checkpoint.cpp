#include "uadrive/checkpoint.hpp"

#include <cmath>
#include <map>

#include "uadrive/error.hpp"
#include "uadrive/textio.hpp"

namespace uadrive::checkpoint {

namespace {

using Header = std::map<std::string, std::string, std::less<>>;

void append_values(std::string& out, std::span<const double> values) {
  for (const double v : values) {
    out += textio::format_sig9(v);
    out += '\n';
  }
}

struct Parsed {
  Header header;
  std::string body;  // everything after the digest line
};

Parsed split_header(const std::string& text) {
  Parsed p;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::MalformedRow, "checkpoint header line without '=': " + std::string(line));
    }
    p.header[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    if (line.substr(0, eq) == "digest") break;
  }
  if (pos < text.size()) p.body = text.substr(pos);
  return p;
}

const std::string& require(const Header& h, const char* key) {
  const auto it = h.find(key);
  if (it == h.end()) throw Error(ErrorCode::MalformedRow, std::string("checkpoint header lacks '") + key + "'");
  return it->second;
}

void check_digest(const Parsed& p) {
  const auto digest = textio::content_digest(p.body);
  if (digest != require(p.header, "digest")) {
    throw Error(ErrorCode::DigestMismatch,
                "checkpoint digest " + require(p.header, "digest") + " does not match its body (" + digest + ")");
  }
}

std::vector<std::vector<double>> read_sections(const std::string& body, std::initializer_list<const char*> names) {
  std::vector<std::vector<double>> out;
  auto name_it = names.begin();
  for (const auto raw : textio::split(body, '\n')) {
    const auto line = textio::trim(raw);
    if (line.empty()) continue;
    if (name_it != names.end() && line == *name_it) {
      out.emplace_back();
      ++name_it;
      continue;
    }
    if (out.empty()) throw Error(ErrorCode::MalformedRow, "checkpoint values before a section name");
    const double v = textio::parse_double(line);
    if (!std::isfinite(v)) throw Error(ErrorCode::MalformedRow, "checkpoint holds a non-finite value");
    out.back().push_back(v);
  }
  if (out.size() != names.size()) throw Error(ErrorCode::MalformedRow, "checkpoint is missing a value section");
  return out;
}

void check_count(const nn::MlpArchitecture& arch, std::size_t got) {
  if (got != arch.parameter_count()) {
    throw Error(ErrorCode::DimensionMismatch, "checkpoint holds " + std::to_string(got) + " values, architecture " +
                                                  arch.to_string() + " needs " +
                                                  std::to_string(arch.parameter_count()));
  }
}

std::uint64_t parse_seed(const Header& h) {
  const auto v = textio::parse_int(require(h, "seed"));
  if (v < 0) throw Error(ErrorCode::MalformedRow, "checkpoint seed must be non-negative");
  return static_cast<std::uint64_t>(v);
}

std::string load_text(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorCode::MissingModel, "model checkpoint '" + path.string() + "' does not exist");
  }
  return textio::read_file(path);
}

}  // namespace

std::string to_string(ModelKind kind) { return kind == ModelKind::Dnn ? "dnn" : "bnn"; }

std::string to_text(const DnnCheckpoint& ckpt) {
  check_count(ckpt.arch, ckpt.weights.size());
  std::string body = "weights\n";
  append_values(body, ckpt.weights);
  return "model=dnn\nlayers=" + ckpt.arch.to_string() + "\nseed=" + std::to_string(ckpt.seed) +
         "\ndigest=" + textio::content_digest(body) + "\n" + body;
}

std::string to_text(const BnnCheckpoint& ckpt) {
  check_count(ckpt.arch, ckpt.vp.mu.size());
  check_count(ckpt.arch, ckpt.vp.rho.size());
  std::string body = "mu\n";
  append_values(body, ckpt.vp.mu);
  body += "rho\n";
  append_values(body, ckpt.vp.rho);
  return "model=bnn\nlayers=" + ckpt.arch.to_string() + "\nprior_sigma=" + textio::format_sig9(ckpt.prior.sigma) +
         "\nnoise_sigma=" + textio::format_sig9(ckpt.like.noise_sigma) + "\nseed=" + std::to_string(ckpt.seed) +
         "\ndigest=" + textio::content_digest(body) + "\n" + body;
}

ModelKind peek_kind(const std::string& text) {
  const auto model = require(split_header(text).header, "model");
  if (model == "dnn") return ModelKind::Dnn;
  if (model == "bnn") return ModelKind::Bnn;
  throw Error(ErrorCode::MalformedRow, "unknown checkpoint model '" + model + "'");
}

DnnCheckpoint parse_dnn(const std::string& text) {
  const auto p = split_header(text);
  if (require(p.header, "model") != "dnn") throw Error(ErrorCode::MalformedRow, "checkpoint is not a dnn model");
  check_digest(p);
  DnnCheckpoint ckpt;
  ckpt.arch = nn::MlpArchitecture::parse(require(p.header, "layers"));
  ckpt.seed = parse_seed(p.header);
  auto sections = read_sections(p.body, {"weights"});
  ckpt.weights = std::move(sections[0]);
  check_count(ckpt.arch, ckpt.weights.size());
  return ckpt;
}

BnnCheckpoint parse_bnn(const std::string& text) {
  const auto p = split_header(text);
  if (require(p.header, "model") != "bnn") throw Error(ErrorCode::MalformedRow, "checkpoint is not a bnn model");
  check_digest(p);
  BnnCheckpoint ckpt;
  ckpt.arch = nn::MlpArchitecture::parse(require(p.header, "layers"));
  ckpt.prior.sigma = textio::parse_double(require(p.header, "prior_sigma"));
  ckpt.like.noise_sigma = textio::parse_double(require(p.header, "noise_sigma"));
  if (!(ckpt.prior.sigma > 0.0) || !(ckpt.like.noise_sigma > 0.0)) {
    throw Error(ErrorCode::MalformedRow, "checkpoint prior and noise scales must be positive");
  }
  ckpt.seed = parse_seed(p.header);
  auto sections = read_sections(p.body, {"mu", "rho"});
  ckpt.vp.mu = std::move(sections[0]);
  ckpt.vp.rho = std::move(sections[1]);
  check_count(ckpt.arch, ckpt.vp.mu.size());
  check_count(ckpt.arch, ckpt.vp.rho.size());
  return ckpt;
}

void save(const DnnCheckpoint& ckpt, const std::filesystem::path& path) { textio::write_file(path, to_text(ckpt)); }
void save(const BnnCheckpoint& ckpt, const std::filesystem::path& path) { textio::write_file(path, to_text(ckpt)); }

ModelKind peek_kind_file(const std::filesystem::path& path) { return peek_kind(load_text(path)); }
DnnCheckpoint load_dnn(const std::filesystem::path& path) { return parse_dnn(load_text(path)); }
BnnCheckpoint load_bnn(const std::filesystem::path& path) { return parse_bnn(load_text(path)); }

}  // namespace uadrive::checkpoint
