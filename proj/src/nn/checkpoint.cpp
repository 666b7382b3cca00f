#include "mvap/nn/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "mvap/csv.hpp"

namespace mvap::nn {

namespace {

constexpr const char* kMagic = "mvap-checkpoint 1";

void write_le32(std::vector<char>& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap32(bits);
  char b[4];
  std::memcpy(b, &bits, 4);
  out.insert(out.end(), b, b + 4);
}

float read_le32(const char* p) {
  std::uint32_t bits;
  std::memcpy(&bits, p, 4);
  if constexpr (std::endian::native == std::endian::big)
    bits = __builtin_bswap32(bits);
  return std::bit_cast<float>(bits);
}

std::string meta_line(const CheckpointMeta& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "final %.9g %.9g %.9g %.9g", m.train_loss,
                m.train_acc, m.test_loss, m.test_acc);
  return buf;
}

struct HeaderField {
  std::string key, rest;
};

HeaderField split_header_line(const std::string& line, const std::string& where) {
  const auto space = line.find(' ');
  if (space == std::string::npos)
    throw ParseError(where + ": malformed checkpoint header line '" + line + "'");
  return {line.substr(0, space), line.substr(space + 1)};
}

}  // namespace

void save_checkpoint(Network<float>& net, const CheckpointMeta& meta,
                     const std::string& path) {
  const auto views = net.param_views();
  std::size_t total = 0;
  for (const auto& v : views) total += v.size;

  std::ostringstream header;
  const Shape in = net.input_shape();
  header << kMagic << '\n'
         << "arch " << net.spec().canonical() << '\n'
         << "input " << in.c << 'x' << in.h << 'x' << in.w << '\n'
         << "classes " << kClassCount << '\n'
         << "seed " << meta.seed << '\n'
         << "epochs " << meta.epochs << '\n'
         << meta_line(meta) << '\n'
         << "tensors " << views.size() << '\n';
  for (const auto& v : views)
    header << "tensor " << v.name << ' ' << v.size << '\n';
  header << "blob_bytes " << total * 4 << '\n' << "---\n";

  std::vector<char> blob;
  blob.reserve(total * 4);
  for (const auto& v : views)
    for (std::size_t i = 0; i < v.size; ++i) write_le32(blob, v.value[i]);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

struct ParsedHeader {
  std::string arch;
  Shape input{};
  CheckpointMeta meta;
  std::vector<std::pair<std::string, std::size_t>> tensors;
  std::size_t blob_bytes = 0;
  std::size_t blob_offset = 0;  // into the file
};

ParsedHeader parse_header(const std::string& content, const std::string& path) {
  ParsedHeader h;
  std::size_t pos = 0;
  int line_no = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t nl = content.find('\n', pos);
    if (nl == std::string::npos)
      throw ParseError(path + ": truncated checkpoint header");
    std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    return line;
  };

  if (next_line() != kMagic)
    throw ParseError(path + ": not a mvap checkpoint (bad magic)");

  auto expect = [&](const std::string& key) {
    const auto field = split_header_line(next_line(), path);
    if (field.key != key)
      throw ParseError(path + ": expected '" + key + "' header line, got '" +
                       field.key + "'");
    return field.rest;
  };

  h.arch = expect("arch");
  {
    const std::string dims = expect("input");
    int c = 0, hh = 0, ww = 0;
    if (std::sscanf(dims.c_str(), "%dx%dx%d", &c, &hh, &ww) != 3)
      throw ParseError(path + ": bad input shape '" + dims + "'");
    h.input = {1, c, hh, ww};
  }
  if (parse_int(expect("classes"), path) != kClassCount)
    throw ParseError(path + ": unsupported class count");
  h.meta.seed = static_cast<std::uint64_t>(parse_int(expect("seed"), path));
  h.meta.epochs = static_cast<int>(parse_int(expect("epochs"), path));
  {
    const std::string finals = expect("final");
    if (std::sscanf(finals.c_str(), "%lf %lf %lf %lf", &h.meta.train_loss,
                    &h.meta.train_acc, &h.meta.test_loss,
                    &h.meta.test_acc) != 4)
      throw ParseError(path + ": bad final metrics line");
  }
  const auto n_tensors =
      static_cast<std::size_t>(parse_int(expect("tensors"), path));
  for (std::size_t i = 0; i < n_tensors; ++i) {
    const auto field = split_header_line(next_line(), path);
    if (field.key != "tensor")
      throw ParseError(path + ": expected tensor line");
    const auto space = field.rest.rfind(' ');
    if (space == std::string::npos)
      throw ParseError(path + ": malformed tensor line");
    h.tensors.emplace_back(
        field.rest.substr(0, space),
        static_cast<std::size_t>(parse_int(field.rest.substr(space + 1), path)));
  }
  h.blob_bytes = static_cast<std::size_t>(parse_int(expect("blob_bytes"), path));
  if (next_line() != "---")
    throw ParseError(path + ": missing header terminator");
  h.blob_offset = pos;

  std::size_t total = 0;
  for (const auto& [_, n] : h.tensors) total += n;
  if (total * 4 != h.blob_bytes)
    throw ParseError(path + ": header tensor sizes disagree with blob_bytes");
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

LoadedCheckpoint load_checkpoint(const std::string& path) {
  const std::string content = read_file(path);
  const ParsedHeader h = parse_header(content, path);
  if (content.size() != h.blob_offset + h.blob_bytes)
    throw ParseError(path + ": blob length mismatch (header says " +
                     std::to_string(h.blob_bytes) + " bytes)");

  LoadedCheckpoint loaded{
      Network<float>(parse_network_spec(h.arch), h.input), h.meta};
  auto views = loaded.net.param_views();
  if (views.size() != h.tensors.size())
    throw ParseError(path + ": tensor count does not match architecture");

  const char* p = content.data() + h.blob_offset;
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (views[i].name != h.tensors[i].first ||
        views[i].size != h.tensors[i].second)
      throw ParseError(path + ": tensor '" + h.tensors[i].first +
                       "' does not match architecture layout");
    for (std::size_t j = 0; j < views[i].size; ++j, p += 4)
      views[i].value[j] = read_le32(p);
  }
  return loaded;
}

std::string checkpoint_arch(const std::string& path) {
  const std::string content = read_file(path);
  return parse_header(content, path).arch;
}

}  // namespace mvap::nn
