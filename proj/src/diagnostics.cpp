#include "errql/diagnostics.hpp"

#include <cctype>
#include <sstream>

#include "errql/errors.hpp"

namespace errql {

std::string to_string(ErrorKind kind) {
  return kind == ErrorKind::Compiler ? "compiler" : "runtime";
}

std::string to_string(OutcomeState state) {
  switch (state) {
    case OutcomeState::NoCompile: return "NoCompile";
    case OutcomeState::CompiledWithRuntimeErrors: return "CompiledWithRuntimeErrors";
    case OutcomeState::Clean: return "Clean";
  }
  return "?";
}

namespace {

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Identifier or dotted qualified name: Foo, count, java.lang.String, Outer$Inner.
bool is_identifier_shaped(const std::string& s) {
  if (s.empty()) return false;
  bool at_segment_start = true;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (at_segment_start) {
      if (!is_ident_start(c)) return false;
      at_segment_start = false;
    } else if (c == '.') {
      at_segment_start = true;
    } else if (!is_ident_char(c)) {
      return false;
    }
  }
  return !at_segment_start;
}

std::string collapse_whitespace(const std::string& s) {
  std::string out;
  bool in_space = true;  // also trims leading space
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      in_space = false;
      out.push_back(c);
    }
  }
  return out;
}

// Splits a line of the form "<file>:<line>: error: <message>". The file
// part is matched non-greedily so a message containing ':' stays intact.
struct StanzaHead {
  std::string file;
  int line;
  std::string message;
};

std::optional<StanzaHead> match_stanza_head(const std::string& line, const char* marker) {
  const std::string needle = std::string(": ") + marker + ": ";
  for (std::size_t colon = line.find(':'); colon != std::string::npos;
       colon = line.find(':', colon + 1)) {
    std::size_t d = colon + 1;
    std::size_t digits = 0;
    while (d + digits < line.size() && std::isdigit(static_cast<unsigned char>(line[d + digits]))) {
      ++digits;
    }
    if (digits == 0) continue;
    if (line.compare(d + digits, needle.size(), needle) != 0) continue;
    StanzaHead head;
    head.file = line.substr(0, colon);
    head.line = std::stoi(line.substr(d, digits));
    head.message = line.substr(d + digits + needle.size());
    if (head.file.empty() || head.line <= 0) continue;
    return head;
  }
  return std::nullopt;
}

std::optional<int> match_count_footer(const std::string& line, const char* noun) {
  std::size_t digits = 0;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  if (digits == 0) return std::nullopt;
  const std::string rest = line.substr(digits);
  const std::string singular = std::string(" ") + noun;
  if (rest == singular || rest == singular + "s") return std::stoi(line.substr(0, digits));
  return std::nullopt;
}

}  // namespace

ErrorType canonicalize(const std::string& raw_message) {
  if (collapse_whitespace(raw_message).empty()) {
    return {ErrorKind::Compiler, kEmptyPlaceholder};
  }
  std::string masked;
  masked.reserve(raw_message.size());
  std::size_t i = 0;
  while (i < raw_message.size()) {
    const char c = raw_message[i];
    if (c == '\'') {
      const std::size_t close = raw_message.find('\'', i + 1);
      if (close != std::string::npos) {
        const std::string inner = raw_message.substr(i + 1, close - i - 1);
        if (is_identifier_shaped(inner)) {
          masked += kIdPlaceholder;
        } else {
          masked.append(raw_message, i, close - i + 1);
        }
        i = close + 1;
        continue;
      }
    }
    masked.push_back(c);
    ++i;
  }
  return {ErrorKind::Compiler, collapse_whitespace(masked)};
}

CompilerParse parse_compiler_output(const std::string& raw) {
  CompilerParse result;
  if (collapse_whitespace(raw).empty()) return result;

  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (auto head = match_stanza_head(line, "error")) {
      CompilerDiagnostic d;
      d.file = head->file;
      d.line = head->line;
      d.raw_message = head->message;
      d.error_type = canonicalize(head->message);
      result.diagnostics.push_back(std::move(d));
      continue;
    }
    if (match_stanza_head(line, "warning")) continue;
    if (auto count = match_count_footer(line, "error")) {
      result.footer_count = *count;
      continue;
    }
    // source echo, caret, "symbol:"/"location:" context, warning footers
  }

  if (result.diagnostics.empty()) {
    throw ParseError("no compiler error stanza found in: '" +
                     collapse_whitespace(raw).substr(0, 80) + "'");
  }
  if (result.footer_count &&
      *result.footer_count != static_cast<int>(result.diagnostics.size())) {
    result.count_warning = "footer reports " + std::to_string(*result.footer_count) +
                           " errors but " + std::to_string(result.diagnostics.size()) +
                           " stanzas were parsed";
  }
  return result;
}

RuntimeDiagnostic parse_runtime_trace(const std::string& raw) {
  std::istringstream in(raw);
  std::string header;
  while (std::getline(in, header)) {
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (!collapse_whitespace(header).empty()) break;
  }

  const auto fail = [&]() -> RuntimeDiagnostic {
    throw ParseError("not a recognizable stack trace header: '" +
                     collapse_whitespace(header).substr(0, 80) + "'");
  };

  std::string rest = header;
  static const std::string kThreadPrefix = "Exception in thread \"";
  if (rest.compare(0, kThreadPrefix.size(), kThreadPrefix) == 0) {
    const std::size_t close = rest.find('"', kThreadPrefix.size());
    if (close == std::string::npos || close + 2 > rest.size() || rest[close + 1] != ' ') fail();
    rest = rest.substr(close + 2);
  }

  std::string cls = rest;
  std::optional<std::string> detail;
  if (const std::size_t sep = rest.find(": "); sep != std::string::npos) {
    cls = rest.substr(0, sep);
    std::string d = rest.substr(sep + 2);
    if (!d.empty()) detail = std::move(d);
  } else if (!rest.empty() && rest.back() == ':') {
    cls = rest.substr(0, rest.size() - 1);
  }

  if (!is_identifier_shaped(cls) || cls.find('.') == std::string::npos) fail();

  RuntimeDiagnostic d;
  d.exception_class = cls;
  d.detail = std::move(detail);
  d.error_type = {ErrorKind::Runtime, d.exception_class};
  return d;
}

OutcomeLabel label_snapshot(const SnapshotEvent& event) {
  if (!event.valid) {
    throw ValidationError("label_snapshot called on invalid snapshot '" +
                          event.snapshot_id + "'");
  }
  if (!event.compile_ok) return {OutcomeState::NoCompile};
  if (!event.runtime_traces.empty()) return {OutcomeState::CompiledWithRuntimeErrors};
  return {OutcomeState::Clean};
}

}  // namespace errql
