#include "kiwi/lin/history.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

namespace kiwi::lin {

namespace {

using nlohmann::json;

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

json maybe_to_json(const MaybeValue& v) { return v ? json(*v) : json(nullptr); }

MaybeValue maybe_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<Value>();
}

std::string maybe_str(const MaybeValue& v) { return v ? std::to_string(*v) : "null"; }

json record_to_json(const OpRecord& r) {
  json j;
  j["thread"] = r.thread;
  j["kind"] = std::string(kind_name(r.op));
  std::visit(Overloaded{
                 [&](const PutOp& o) {
                   j["args"] = {{"key", o.key}, {"value", maybe_to_json(o.value)}};
                   j["result"] = nullptr;
                 },
                 [&](const GetOp& o) {
                   j["args"] = {{"key", o.key}};
                   j["result"] = maybe_to_json(o.result);
                 },
                 [&](const ScanOp& o) {
                   j["args"] = {{"lo", o.lo}, {"hi", o.hi}};
                   json pairs = json::array();
                   for (const auto& [k, v] : o.result) pairs.push_back({k, v});
                   j["result"] = std::move(pairs);
                 },
                 [&](const SizeOp& o) {
                   j["args"] = json::object();
                   j["result"] = o.result;
                 },
                 [&](const IsEmptyOp& o) {
                   j["args"] = json::object();
                   j["result"] = o.result;
                 },
             },
             r.op);
  j["invokeTs"] = r.invoke_ts;
  j["responseTs"] = r.response_ts;
  return j;
}

OpRecord record_from_json(const json& j) {
  OpRecord r;
  r.thread = j.at("thread").get<std::uint32_t>();
  r.invoke_ts = j.at("invokeTs").get<std::int64_t>();
  r.response_ts = j.at("responseTs").get<std::int64_t>();
  const std::string kind = j.at("kind").get<std::string>();
  const json& args = j.at("args");
  const json& result = j.at("result");
  if (kind == "put") {
    r.op = PutOp{args.at("key").get<Key>(), maybe_from_json(args.at("value"))};
  } else if (kind == "get") {
    r.op = GetOp{args.at("key").get<Key>(), maybe_from_json(result)};
  } else if (kind == "scan") {
    ScanOp s{args.at("lo").get<Key>(), args.at("hi").get<Key>(), {}};
    for (const auto& p : result) s.result.emplace_back(p.at(0).get<Key>(), p.at(1).get<Value>());
    r.op = std::move(s);
  } else if (kind == "size") {
    r.op = SizeOp{result.get<std::int64_t>()};
  } else if (kind == "isEmpty") {
    r.op = IsEmptyOp{result.get<bool>()};
  } else {
    throw HistoryError("unknown op kind '" + kind + "'");
  }
  return r;
}

}  // namespace

std::string_view kind_name(const Operation& op) {
  return std::visit(Overloaded{
                        [](const PutOp&) { return std::string_view("put"); },
                        [](const GetOp&) { return std::string_view("get"); },
                        [](const ScanOp&) { return std::string_view("scan"); },
                        [](const SizeOp&) { return std::string_view("size"); },
                        [](const IsEmptyOp&) { return std::string_view("isEmpty"); },
                    },
                    op);
}

void validate(const History& h) {
  std::map<std::uint32_t, std::vector<const OpRecord*>> by_thread;
  for (std::size_t i = 0; i < h.records.size(); ++i) {
    const OpRecord& r = h.records[i];
    if (r.invoke_ts >= r.response_ts) {
      throw HistoryError("record " + std::to_string(i) + " (" + describe(r) + "): invokeTs must precede responseTs");
    }
    if (const auto* s = std::get_if<ScanOp>(&r.op); s != nullptr && s->lo > s->hi) {
      throw HistoryError("record " + std::to_string(i) + ": scan with lo > hi");
    }
    by_thread[r.thread].push_back(&r);
  }
  for (auto& [t, ops] : by_thread) {
    std::sort(ops.begin(), ops.end(), [](const OpRecord* a, const OpRecord* b) { return a->invoke_ts < b->invoke_ts; });
    for (std::size_t i = 1; i < ops.size(); ++i) {
      if (ops[i]->invoke_ts < ops[i - 1]->response_ts) {
        throw HistoryError("thread " + std::to_string(t) + " has overlapping operations: " + describe(*ops[i - 1]) +
                           " and " + describe(*ops[i]));
      }
    }
  }
}

std::string describe(const OpRecord& r) {
  std::ostringstream os;
  os << 't' << r.thread << ' ';
  std::visit(Overloaded{
                 [&](const PutOp& o) { os << "put(" << o.key << ", " << maybe_str(o.value) << ")"; },
                 [&](const GetOp& o) { os << "get(" << o.key << ") -> " << maybe_str(o.result); },
                 [&](const ScanOp& o) {
                   os << "scan(" << o.lo << ", " << o.hi << ") -> {";
                   for (std::size_t i = 0; i < o.result.size(); ++i) {
                     os << (i ? ", " : "") << o.result[i].first << ':' << o.result[i].second;
                   }
                   os << '}';
                 },
                 [&](const SizeOp& o) { os << "size() -> " << o.result; },
                 [&](const IsEmptyOp& o) { os << "isEmpty() -> " << (o.result ? "true" : "false"); },
             },
             r.op);
  os << " [" << r.invoke_ts << ", " << r.response_ts << ']';
  return os.str();
}

std::string to_jsonl(const History& h) {
  std::string out;
  json meta{{"type", "meta"},
            {"seed", h.meta.seed},
            {"threads", h.meta.threads},
            {"opMix", h.meta.op_mix},
            {"delayProfile", h.meta.delay_profile}};
  out += meta.dump();
  out += '\n';
  for (const auto& r : h.records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

History from_jsonl(const std::string& text) {
  History h;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool saw_meta = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!j.is_object()) throw HistoryError("expected a JSON object");
      if (j.contains("type") && j["type"] == "meta") {
        if (saw_meta) throw HistoryError("duplicate metadata line");
        saw_meta = true;
        h.meta.seed = j.value("seed", std::uint64_t{0});
        h.meta.threads = j.value("threads", std::uint32_t{0});
        h.meta.op_mix = j.value("opMix", std::string());
        h.meta.delay_profile = j.value("delayProfile", std::string());
        continue;
      }
      h.records.push_back(record_from_json(j));
    } catch (const json::exception& e) {
      throw HistoryError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const HistoryError& e) {
      throw HistoryError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return h;
}

void save_history(const History& h, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw HistoryError("cannot open " + path.string() + " for writing");
  out << to_jsonl(h);
  if (!out.flush()) throw HistoryError("write failed: " + path.string());
}

History load_history(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HistoryError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str());
}

}  // namespace kiwi::lin
