#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>

#include "memschaos/cli.hpp"
#include "memschaos/error.hpp"

namespace memschaos::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::IoError, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

TableResult write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows) {
  std::string text;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) text += ',';
    text += header[c];
  }
  text += '\n';
  char buf[32];
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw Error(ErrorKind::InvariantViolation,
                  "row width " + std::to_string(row.size()) + " != header width " +
                      std::to_string(header.size()) + " in " + path.string());
    }
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) text += ',';
      const int n = std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      text.append(buf, static_cast<std::size_t>(n));
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  return {path, rows.size(), sha256_hex(text)};
}

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Noise: return "noise";
    case Command::Homoclinic: return "homoclinic";
    case Command::Threshold: return "threshold";
    case Command::Simulate: return "simulate";
    case Command::Lyapunov: return "lyapunov";
    case Command::ControlScan: return "control-scan";
  }
  return "?";
}

std::optional<Command> parse_command(std::string_view name) {
  for (Command c : {Command::Noise, Command::Homoclinic, Command::Threshold, Command::Simulate,
                    Command::Lyapunov, Command::ControlScan}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

}  // namespace memschaos::cli
