#include "sscn/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sscn/error.hpp"

namespace sscn {
namespace {

void put_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << format_double(*v);
}

std::optional<double> parse_optional(const std::string& field, std::size_t line) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError(line, "bad number '" + field + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw NumericalFailure("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRecord>& trace) {
  out << kTraceHeader << '\n';
  for (const TraceRecord& r : trace) {
    out << r.k << ',' << format_double(r.epochs) << ',' << format_double(r.F) << ',';
    put_optional(out, r.gap);
    out << ',';
    put_optional(out, r.grad_norm);
    out << ',';
    put_optional(out, r.M_used);
    out << ',' << format_double(r.elapsed_s) << '\n';
  }
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  write_trace_csv(out, trace);
  if (!out) throw ConfigError("write to '" + path + "' failed");
}

std::vector<TraceRecord> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw ParseError(1, "unexpected trace header");
  std::vector<TraceRecord> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (fields.size() != 7) throw ParseError(lineno, "expected 7 fields");
    TraceRecord r;
    const auto k = parse_optional(fields[0], lineno);
    if (!k) throw ParseError(lineno, "missing k");
    r.k = static_cast<long>(*k);
    r.epochs = parse_optional(fields[1], lineno).value_or(0.0);
    r.F = parse_optional(fields[2], lineno).value_or(0.0);
    r.gap = parse_optional(fields[3], lineno);
    r.grad_norm = parse_optional(fields[4], lineno);
    r.M_used = parse_optional(fields[5], lineno);
    r.elapsed_s = parse_optional(fields[6], lineno).value_or(0.0);
    out.push_back(r);
  }
  return out;
}

}  // namespace sscn
