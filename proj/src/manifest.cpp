#include "nlse/manifest.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "json.hpp"

namespace nlse {

const char* kToolVersion = "nlselab 1.0.0";

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("sha256_file: cannot open " + path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256_file: digest init failed");
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    if (got > 0 && EVP_DigestUpdate(ctx.get(), buf, std::size_t(got)) != 1)
      throw std::runtime_error("sha256_file: digest update failed");
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw std::runtime_error("sha256_file: digest final failed");
  std::string hex(2 * len, '0');
  static const char* digits = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex[2 * i] = digits[md[i] >> 4];
    hex[2 * i + 1] = digits[md[i] & 0xf];
  }
  return hex;
}

std::vector<std::string> standard_conventions() {
  return {
      "equation: i h dpsi/dt = -(h^2/2) lap psi + (1/(2 h^alpha)) W'(|psi|) psi/|psi| "
      "+ V(x) psi, psi = 0 on the boundary",
      "energy: integral of (h^2/2)|grad psi|^2 + h^{-alpha} W(|psi|) + V |psi|^2 "
      "(conserved by the flow)",
      "scaled charge: C_h = h^{-N beta} integral of |psi|^2 with beta = 1 + alpha/2",
      "momentum law: d/dt integral of x |psi|^2 = h Im integral of conj(psi) grad psi; "
      "barycenter laws are stated per unit (plain, unscaled) charge",
      "force law: charge * q'' = - integral of |psi|^2 grad V - (h^2/2) boundary integral "
      "of |dpsi/dn|^2 n, with n the outward normal",
  };
}

std::string write_manifest(const std::string& dir, RunManifest m,
                           const std::vector<std::string>& files) {
  m.outputs.clear();
  for (const auto& f : files) {
    OutputEntry e;
    e.path = f;
    const std::string full = dir + "/" + f;
    std::ifstream in(full, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("write_manifest: missing output " + full);
    e.bytes = std::uint64_t(in.tellg());
    in.close();
    e.sha256 = sha256_file(full);
    m.outputs.push_back(std::move(e));
  }

  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["command"] = m.command;
  j["config"] = nlohmann::json::parse(m.config_resolved.empty() ? "null" : m.config_resolved);
  j["seed"] = m.seed;
  j["wall_clock_s"] = m.wall_clock_s;
  j["conventions"] = m.conventions.empty() ? standard_conventions() : m.conventions;
  j["outputs"] = nlohmann::json::array();
  for (const auto& e : m.outputs)
    j["outputs"].push_back({{"path", e.path}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  const std::string text = j.dump(2) + "\n";

  std::ofstream out(dir + "/manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("write_manifest: cannot write " + dir + "/manifest.json");
  out << text;
  return text;
}

}  // namespace nlse
