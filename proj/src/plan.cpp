#include "zkgraph/plan.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

#include "zkgraph/error.hpp"

namespace zkgraph {

namespace {

struct OpName {
  std::string_view name;
  PlanOp op;
};

constexpr OpName kOps[] = {
    {"expand_single", PlanOp::ExpandSingle},
    {"expand_single_csr", PlanOp::ExpandSingleCsr},
    {"expand_set", PlanOp::ExpandSet},
    {"sssp", PlanOp::Sssp},
    {"reach", PlanOp::Reach},
    {"allsp", PlanOp::AllSp},
    {"canon", PlanOp::Canon},
    {"filter", PlanOp::Filter},
    {"topk", PlanOp::TopK},
    {"project", PlanOp::Project},
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

class Parser {
 public:
  Parser(std::string_view line, size_t line_no, const ParamMap& params)
      : s_(line), line_(line_no), params_(params) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::SyntaxError,
                std::to_string(line_) + ":" + std::to_string(pos_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (s_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }
  void expect(std::string_view tok) {
    if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
  }
  bool peek_ident() {
    skip_ws();
    return pos_ < s_.size() && ident_start(s_[pos_]);
  }
  std::string ident() {
    skip_ws();
    if (pos_ >= s_.size() || !ident_start(s_[pos_])) fail("expected an identifier");
    const size_t b = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(b, pos_ - b));
  }
  size_t pos() const { return pos_; }
  void reset(size_t p) { pos_ = p; }

  PlanValue value() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected a value");
    const char c = s_[pos_];
    if (c == '$') {
      ++pos_;
      const std::string name = ident();
      auto it = params_.find(name);
      if (it == params_.end()) {
        throw Error(ErrorCode::UnboundParam,
                    "line " + std::to_string(line_) + ": $" + name + " has no value");
      }
      static const ParamMap kNoParams;
      Parser sub(it->second, line_, kNoParams);
      PlanValue v = sub.value();
      if (!sub.at_end()) {
        PlanValue t;
        t.kind = PlanValue::Kind::String;
        t.text = it->second;
        return t;
      }
      return v;
    }
    if (c == '"') {
      ++pos_;
      PlanValue v;
      v.kind = PlanValue::Kind::String;
      while (true) {
        if (pos_ >= s_.size()) fail("unterminated string");
        char d = s_[pos_++];
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= s_.size()) fail("unterminated string");
          d = s_[pos_++];
        }
        v.text += d;
      }
      return v;
    }
    if (c == '[') {
      ++pos_;
      PlanValue v;
      v.kind = PlanValue::Kind::List;
      if (accept("]")) return v;
      do {
        v.list.push_back(value());
      } while (accept(","));
      expect("]");
      return v;
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      const size_t b = pos_;
      if (c == '-') ++pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      PlanValue v;
      const auto* first = s_.data() + b;
      const auto* last = s_.data() + pos_;
      auto [p, ec] = std::from_chars(first, last, v.number);
      if (ec != std::errc() || p != last) {
        reset(b);
        fail("bad integer");
      }
      return v;
    }
    if (ident_start(c)) {
      PlanValue v;
      v.kind = PlanValue::Kind::Ident;
      v.text = ident();
      return v;
    }
    fail(std::string("unexpected '") + c + "'");
  }

 private:
  std::string_view s_;
  size_t pos_ = 0;
  size_t line_;
  const ParamMap& params_;
};

struct Call {
  PlanOp op;
  std::vector<PlanArg> args;
};

Call parse_call(Parser& p, size_t line) {
  const std::string name = p.ident();
  auto it = std::find_if(std::begin(kOps), std::end(kOps),
                         [&](const OpName& o) { return o.name == name; });
  if (it == std::end(kOps)) {
    throw Error(ErrorCode::UnknownOperator,
                "line " + std::to_string(line) + ": unknown operator " + name);
  }
  Call call{it->op, {}};
  p.expect("(");
  if (p.accept(")")) return call;
  do {
    PlanArg a;
    const size_t start = p.pos();
    if (p.peek_ident()) {
      const std::string key = p.ident();
      if (p.accept(">=")) {
        a.op = ArgOp::Ge;
      } else if (p.accept("<=")) {
        a.op = ArgOp::Le;
      } else if (p.accept("=")) {
        a.op = ArgOp::Eq;
      } else if (p.accept("[")) {
        a.op = ArgOp::Index;
      } else {
        p.reset(start);
      }
      if (a.op != ArgOp::Positional) a.key = key;
    }
    a.value = p.value();
    if (a.op == ArgOp::Index) p.expect("]");
    call.args.push_back(std::move(a));
  } while (p.accept(","));
  p.expect(")");
  return call;
}

std::string strip_comment(std::string_view line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && in_string) {
      ++i;
    } else if (line[i] == '"') {
      in_string = !in_string;
    } else if (line[i] == '#' && !in_string) {
      return std::string(line.substr(0, i));
    }
  }
  return std::string(line);
}

}  // namespace

std::string_view plan_op_name(PlanOp op) {
  for (const auto& o : kOps) {
    if (o.op == op) return o.name;
  }
  return "?";
}

std::string PlanValue::canonical() const {
  switch (kind) {
    case Kind::Int:
      return std::to_string(number);
    case Kind::Ident:
      return text;
    case Kind::String:
      return quote(text);
    case Kind::List: {
      std::string out = "[";
      for (size_t i = 0; i < list.size(); ++i) {
        if (i) out += ",";
        out += list[i].canonical();
      }
      return out + "]";
    }
  }
  return {};
}

const PlanArg* PlanNode::find(std::string_view key) const {
  for (const auto& a : args) {
    if (a.op != ArgOp::Positional && a.key == key) return &a;
  }
  return nullptr;
}

std::vector<const PlanArg*> PlanNode::positional() const {
  std::vector<const PlanArg*> out;
  for (const auto& a : args) {
    if (a.op == ArgOp::Positional) out.push_back(&a);
  }
  return out;
}

std::string QueryPlan::canonical_text() const {
  std::string out;
  for (const auto& n : nodes) {
    out += n.name + " = " + std::string(plan_op_name(n.op)) + "(" + n.input;
    for (const auto& a : n.args) {
      out += ", ";
      switch (a.op) {
        case ArgOp::Positional:
          break;
        case ArgOp::Eq:
          out += a.key + "=";
          break;
        case ArgOp::Ge:
          out += a.key + ">=";
          break;
        case ArgOp::Le:
          out += a.key + "<=";
          break;
        case ArgOp::Index:
          out += a.key + "[";
          break;
      }
      out += a.value.canonical();
      if (a.op == ArgOp::Index) out += "]";
    }
    out += ")\n";
  }
  return out;
}

Digest QueryPlan::hash() const {
  const std::string text = canonical_text();
  Sha256 h;
  h.update("ZKGRAPH/plan/v1");
  h.update(text);
  return h.finish();
}

std::optional<DbTable> resolve_table(const Schema& schema, std::string_view name) {
  const std::string n = lower(name);
  if (n == "edges" || n == lower(schema.edge_kind)) return DbTable::Edges;
  if (n == "nodes" || n == lower(schema.node_label)) return DbTable::Nodes;
  return std::nullopt;
}

QueryPlan parse_plan(std::string_view text, const ParamMap& params, const Schema* schema) {
  QueryPlan plan;
  plan.params = params;
  std::set<std::string> names;
  size_t line_no = 0;
  size_t anon = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = strip_comment(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    Parser p(line, line_no, params);
    if (p.at_end()) continue;

    std::optional<std::string> stmt_name;
    {
      const size_t save = p.pos();
      if (p.peek_ident()) {
        const std::string n = p.ident();
        if (p.accept("=")) {
          stmt_name = n;
        } else {
          p.reset(save);
        }
      }
    }
    if (stmt_name && names.count(*stmt_name)) {
      p.fail("statement " + *stmt_name + " is already defined");
    }

    // A statement may start from an earlier result: `name |> call ...`.
    std::string prev;
    {
      const size_t save = p.pos();
      if (p.peek_ident()) {
        const std::string src = p.ident();
        if (p.accept("|>")) {
          if (!names.count(src)) {
            throw Error(ErrorCode::UnboundInput, "line " + std::to_string(line_no) + ": " +
                                                     src + " is not a statement");
          }
          prev = src;
        } else {
          p.reset(save);
        }
      }
    }

    std::vector<Call> calls;
    calls.push_back(parse_call(p, line_no));
    while (p.accept("|>")) calls.push_back(parse_call(p, line_no));
    if (!p.at_end()) p.fail("unexpected trailing input");

    for (size_t i = 0; i < calls.size(); ++i) {
      PlanNode node;
      node.op = calls[i].op;
      node.line = line_no;
      node.args = std::move(calls[i].args);
      if (i == 0 && prev.empty()) {
        if (node.args.empty() || node.args[0].op != ArgOp::Positional ||
            node.args[0].value.kind != PlanValue::Kind::Ident) {
          throw Error(ErrorCode::UnboundInput,
                      "line " + std::to_string(line_no) + ": " +
                          std::string(plan_op_name(node.op)) + " has no input");
        }
        node.input = node.args[0].value.text;
        node.args.erase(node.args.begin());
        node.input_is_node = names.count(node.input) > 0;
        if (!node.input_is_node) {
          const bool known = !schema || resolve_table(*schema, node.input).has_value();
          if (!known) {
            throw Error(ErrorCode::UnboundInput, "line " + std::to_string(line_no) +
                                                     ": " + node.input +
                                                     " is neither a statement nor a table");
          }
        }
      } else {
        node.input = prev;
        node.input_is_node = true;
      }
      if (const PlanArg* from = node.find("from")) {
        if (from->value.kind != PlanValue::Kind::Ident || !names.count(from->value.text)) {
          throw Error(ErrorCode::UnboundInput,
                      "line " + std::to_string(line_no) + ": " + from->value.canonical() +
                          " is not a statement");
        }
      }
      const bool last = i + 1 == calls.size();
      node.name = (last && stmt_name) ? *stmt_name : "_" + std::to_string(++anon);
      while (names.count(node.name)) node.name = "_" + std::to_string(++anon);
      names.insert(node.name);
      prev = node.name;
      plan.nodes.push_back(std::move(node));
    }
  }
  if (plan.nodes.empty()) throw Error(ErrorCode::SyntaxError, "1:1: empty plan");
  if (plan.nodes[0].input_is_node) {
    throw Error(ErrorCode::UnboundInput, "the first operator must read a database table");
  }
  return plan;
}

ParamMap parse_params(const std::vector<std::string>& kv) {
  ParamMap out;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::BadParameter, "expected name=value, got " + s);
    }
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

}  // namespace zkgraph
