#include "unilab/event.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace unilab {

namespace {

struct KindToken {
  TraceKind kind;
  const char* token;
};

constexpr std::array<KindToken, 10> kTokens = {{
    {TraceKind::MsgDeliver, "msg"},
    {TraceKind::ObjApply, "obj"},
    {TraceKind::Step, "step"},
    {TraceKind::ActBroadcast, "bcast"},
    {TraceKind::ActSend, "send"},
    {TraceKind::ActRecv, "recv"},
    {TraceKind::ActFinish, "finish"},
    {TraceKind::ActDeliver, "deliver"},
    {TraceKind::ActDecide, "decide"},
    {TraceKind::ActAttest, "attest"},
}};

std::optional<std::uint64_t> parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

const char* trace_kind_token(TraceKind k) {
  for (const auto& t : kTokens)
    if (t.kind == k) return t.token;
  return "?";
}

std::optional<TraceKind> trace_kind_from_token(std::string_view token) {
  for (const auto& t : kTokens)
    if (t.token == token) return t.kind;
  return std::nullopt;
}

std::string Trace::to_text() const {
  std::ostringstream out;
  for (const auto& [k, v] : meta) out << "# " << k << " " << v << "\n";
  out << "# horizon_exceeded " << (horizon_exceeded ? "1" : "0") << "\n";
  for (const auto& e : entries) {
    out << e.seq << " " << trace_kind_token(e.kind) << " " << e.origin
        << " -> " << e.target << " "
        << (e.payload.empty() ? std::string("-") : to_hex(e.payload)) << "\n";
  }
  return out.str();
}

std::optional<Trace> Trace::parse(std::string_view text) {
  Trace trace;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto parts = split_ws(line.substr(1));
      if (parts.empty()) continue;
      std::string key(parts[0]);
      std::string value;
      for (std::size_t i = 1; i < parts.size(); ++i) {
        if (i > 1) value += ' ';
        value += std::string(parts[i]);
      }
      if (key == "horizon_exceeded")
        trace.horizon_exceeded = (value == "1");
      else
        trace.meta[key] = value;
      continue;
    }
    auto parts = split_ws(line);
    if (parts.size() != 6 || parts[3] != "->") return std::nullopt;
    auto seq = parse_u64(parts[0]);
    auto kind = trace_kind_from_token(parts[1]);
    auto origin = parse_u64(parts[2]);
    auto target = parse_u64(parts[4]);
    if (!seq || !kind || !origin || !target) return std::nullopt;
    TraceEntry entry;
    entry.seq = *seq;
    entry.kind = *kind;
    entry.origin = static_cast<ProcessId>(*origin);
    entry.target = static_cast<ProcessId>(*target);
    if (parts[5] != "-") {
      auto payload = from_hex(std::string(parts[5]));
      if (!payload) return std::nullopt;
      entry.payload = std::move(*payload);
    }
    trace.entries.push_back(std::move(entry));
  }
  return trace;
}

}  // namespace unilab
