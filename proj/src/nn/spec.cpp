#include "mvap/nn/spec.hpp"

#include <map>
#include <sstream>
#include <stdexcept>

#include "mvap/csv.hpp"

namespace mvap::nn {

namespace {

const std::map<std::string, std::string>& alias_table() {
  static const std::map<std::string, std::string> table = {
      {"tiny-cnn-a",
       "conv(8,3)-bn-relu-pool2-conv(16,3)-bn-relu-pool2-"
       "flatten-dropout(0.25)-dense(64)-relu-dense(9)"},
      {"tiny-cnn-b",
       "conv(12,5)-bn-relu-pool2-conv(12,3)-bn-relu-pool2-"
       "flatten-dropout(0.25)-dense(48)-relu-dense(9)"},
      {"tiny-mlp",
       "flatten-dense(96)-relu-dropout(0.25)-dense(9)"},
  };
  return table;
}

// Splits on '-' at paren depth zero, so "batchnorm(0.1,1e-05)" stays whole.
std::vector<std::string> split_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  int depth = 0;
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == '-' && depth == 0) {
      tokens.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  tokens.push_back(current);
  return tokens;
}

struct Token {
  std::string head;
  std::vector<std::string> args;
};

Token parse_token(const std::string& token) {
  const std::size_t open = token.find('(');
  if (open == std::string::npos) return {token, {}};
  if (token.back() != ')')
    throw std::invalid_argument("bad layer token: '" + token + "'");
  Token t;
  t.head = token.substr(0, open);
  t.args = split_csv_line(token.substr(open + 1, token.size() - open - 2));
  return t;
}

int int_arg(const Token& t, std::size_t i) {
  return static_cast<int>(parse_int(t.args[i], "layer token '" + t.head + "'"));
}

double real_arg(const Token& t, std::size_t i) {
  return parse_double(t.args[i], "layer token '" + t.head + "'");
}

void require_args(const Token& t, std::size_t lo, std::size_t hi) {
  if (t.args.size() < lo || t.args.size() > hi)
    throw std::invalid_argument("layer token '" + t.head + "' takes " +
                                std::to_string(lo) + ".." + std::to_string(hi) +
                                " arguments");
}

LayerSpec parse_layer(const std::string& raw) {
  const Token t = parse_token(raw);
  LayerSpec s;
  if (t.head == "conv") {
    require_args(t, 2, 4);
    s.kind = LayerKind::conv;
    s.out_ch = int_arg(t, 0);
    s.kernel = int_arg(t, 1);
    s.stride = t.args.size() > 2 ? int_arg(t, 2) : 1;
    s.pad = t.args.size() > 3 ? int_arg(t, 3) : (s.kernel - 1) / 2;
    if (s.out_ch <= 0 || s.kernel <= 0 || s.stride <= 0 || s.pad < 0)
      throw std::invalid_argument("bad conv parameters: '" + raw + "'");
  } else if (t.head == "maxpool" || t.head == "pool") {
    require_args(t, 1, 2);
    s.kind = LayerKind::maxpool;
    s.kernel = int_arg(t, 0);
    s.stride = t.args.size() > 1 ? int_arg(t, 1) : s.kernel;
    if (s.kernel <= 0 || s.stride <= 0)
      throw std::invalid_argument("bad pool parameters: '" + raw + "'");
  } else if (t.head == "pool2") {
    require_args(t, 0, 0);
    s.kind = LayerKind::maxpool;
    s.kernel = 2;
    s.stride = 2;
  } else if (t.head == "batchnorm" || t.head == "bn") {
    require_args(t, 0, 2);
    s.kind = LayerKind::batchnorm;
    if (!t.args.empty()) s.momentum = real_arg(t, 0);
    if (t.args.size() > 1) s.epsilon = real_arg(t, 1);
    if (!(s.momentum > 0.0 && s.momentum <= 1.0) || !(s.epsilon > 0.0))
      throw std::invalid_argument("bad batchnorm parameters: '" + raw + "'");
  } else if (t.head == "dropout") {
    require_args(t, 1, 1);
    s.kind = LayerKind::dropout;
    s.rate = real_arg(t, 0);
    if (!(s.rate >= 0.0 && s.rate < 1.0))
      throw std::invalid_argument("dropout rate must be in [0,1): '" + raw + "'");
  } else if (t.head == "dense") {
    require_args(t, 1, 1);
    s.kind = LayerKind::dense;
    s.out_dim = int_arg(t, 0);
    if (s.out_dim <= 0)
      throw std::invalid_argument("bad dense parameters: '" + raw + "'");
  } else if (t.head == "relu") {
    require_args(t, 0, 0);
    s.kind = LayerKind::relu;
  } else if (t.head == "flatten") {
    require_args(t, 0, 0);
    s.kind = LayerKind::flatten;
  } else if (t.head == "softmax") {
    require_args(t, 0, 0);
    s.kind = LayerKind::softmax;
  } else {
    throw std::invalid_argument("unknown layer token: '" + raw + "'");
  }
  return s;
}

}  // namespace

std::string NetworkSpec::canonical() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& l : layers) {
    if (l.kind == LayerKind::softmax) continue;  // implicit head
    if (!first) out << '-';
    first = false;
    switch (l.kind) {
      case LayerKind::conv:
        out << "conv(" << l.out_ch << ',' << l.kernel << ',' << l.stride << ','
            << l.pad << ')';
        break;
      case LayerKind::maxpool:
        out << "maxpool(" << l.kernel << ',' << l.stride << ')';
        break;
      case LayerKind::batchnorm:
        out << "batchnorm(" << format_real(l.momentum) << ','
            << format_real(l.epsilon) << ')';
        break;
      case LayerKind::dropout:
        out << "dropout(" << format_real(l.rate) << ')';
        break;
      case LayerKind::dense:
        out << "dense(" << l.out_dim << ')';
        break;
      case LayerKind::relu:
        out << "relu";
        break;
      case LayerKind::flatten:
        out << "flatten";
        break;
      case LayerKind::softmax:
        break;
    }
  }
  return out.str();
}

NetworkSpec parse_network_spec(const std::string& text) {
  const auto alias = alias_table().find(text);
  const std::string& expanded = alias != alias_table().end() ? alias->second : text;

  if (expanded.empty())
    throw std::invalid_argument("empty network spec");
  NetworkSpec spec;
  for (const auto& token : split_tokens(expanded))
    spec.layers.push_back(parse_layer(token));
  return spec;
}

std::vector<std::string> arch_aliases() {
  std::vector<std::string> names;
  for (const auto& [name, _] : alias_table()) names.push_back(name);
  return names;
}

bool is_arch_alias(const std::string& name) {
  return alias_table().count(name) != 0;
}

}  // namespace mvap::nn
