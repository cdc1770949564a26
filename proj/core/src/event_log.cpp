#include "powlgen/event_log.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "util.hpp"

namespace powlgen {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Splits one record. Quoted fields may contain commas and doubled quotes.
std::vector<std::string> csv_record(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      if (!cur.empty() || was_quoted) throw LogFormatError(line_no, "unexpected quote");
      quoted = was_quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
      was_quoted = false;
    } else {
      if (was_quoted) throw LogFormatError(line_no, "text after closing quote");
      cur += c;
    }
  }
  if (quoted) throw LogFormatError(line_no, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

std::string write_csv(const EventLog& log) {
  std::ostringstream out;
  out << "case_id,activity,event_index\n";
  for (const auto& c : log.cases) {
    if (c.trace.empty()) {
      out << csv_field(c.id) << ",,\n";
      continue;
    }
    for (std::size_t i = 0; i < c.trace.size(); ++i)
      out << csv_field(c.id) << ',' << csv_field(c.trace[i]) << ',' << i << '\n';
  }
  return out.str();
}

EventLog read_csv(std::string_view text) {
  auto lines = detail::split_lines(text);
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw LogFormatError(1, "missing header");
  auto header = csv_record(lines[0], 1);
  for (auto& h : header) h = detail::trim(h);
  if (header != std::vector<std::string>{"case_id", "activity", "event_index"})
    throw LogFormatError(1, "expected header case_id,activity,event_index");

  std::vector<std::string> order;
  std::map<std::string, std::map<std::size_t, std::string>> events;
  std::set<std::string> empty_cases;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto line_no = n + 1;
    if (detail::trim(lines[n]).empty()) throw LogFormatError(line_no, "blank row");
    auto f = csv_record(lines[n], line_no);
    if (f.size() != 3) throw LogFormatError(line_no, "expected 3 fields, found " + std::to_string(f.size()));
    const auto& id = f[0];
    if (id.empty()) throw LogFormatError(line_no, "empty case_id");
    const bool seen = events.count(id) > 0 || empty_cases.count(id) > 0;
    if (!seen) order.push_back(id);
    if (f[1].empty() && f[2].empty()) {
      if (seen) throw LogFormatError(line_no, "empty-trace row for case " + id + " which has other rows");
      empty_cases.insert(id);
      continue;
    }
    if (empty_cases.count(id)) throw LogFormatError(line_no, "case " + id + " was declared empty");
    if (f[1].empty()) throw LogFormatError(line_no, "empty activity");
    std::size_t index = 0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), index);
    if (ec != std::errc() || ptr != f[2].data() + f[2].size())
      throw LogFormatError(line_no, "event_index is not a non-negative integer: " + f[2]);
    auto& evs = events[id];
    if (!evs.emplace(index, f[1]).second)
      throw LogFormatError(line_no, "duplicate event_index " + f[2] + " in case " + id);
  }

  EventLog log;
  for (const auto& id : order) {
    Case c{id, {}};
    auto it = events.find(id);
    if (it != events.end()) {
      std::size_t expected = 0;
      for (const auto& [idx, label] : it->second) {
        if (idx != expected)
          throw LogFormatError(lines.size(), "case " + id + " is missing event_index " + std::to_string(expected));
        c.trace.push_back(label);
        ++expected;
      }
    }
    log.cases.push_back(std::move(c));
  }
  return log;
}

std::string write_xes(const EventLog& log) {
  using detail::xml_escape;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<log xes.version=\"1.0\" xmlns=\"http://www.xes-standard.org/\">\n";
  out << "  <extension name=\"Concept\" prefix=\"concept\" uri=\"http://www.xes-standard.org/concept.xesext\"/>\n";
  for (const auto& c : log.cases) {
    out << "  <trace>\n    <string key=\"concept:name\" value=\"" << xml_escape(c.id) << "\"/>\n";
    for (const auto& a : c.trace)
      out << "    <event>\n      <string key=\"concept:name\" value=\"" << xml_escape(a) << "\"/>\n    </event>\n";
    out << "  </trace>\n";
  }
  out << "</log>\n";
  return out.str();
}

std::vector<Trace> distinct_traces(const EventLog& log) {
  std::set<Trace> s;
  for (const auto& c : log.cases) s.insert(c.trace);
  return {s.begin(), s.end()};
}

}  // namespace powlgen
