#pragma once

#include <optional>
#include <string>
#include <vector>

#include "errql/ingest.hpp"

namespace errql {

enum class ErrorKind { Compiler, Runtime };

std::string to_string(ErrorKind kind);

// Canonical error identity: "same error" for EQ/RED means exact equality
// of (kind, canonical). For compiler errors the canonical form is the
// normalized first-line message template; for runtime errors it is the
// fully qualified exception class.
struct ErrorType {
  ErrorKind kind = ErrorKind::Compiler;
  std::string canonical;

  auto operator<=>(const ErrorType&) const = default;
};

struct CompilerDiagnostic {
  std::string file;
  int line = 0;  // positive
  std::string raw_message;
  ErrorType error_type;  // kind == Compiler
};

// Parse result for one snapshot's compiler output block. A "N errors"
// footer that disagrees with the parsed stanza count attaches a warning
// instead of failing the parse.
struct CompilerParse {
  std::vector<CompilerDiagnostic> diagnostics;
  std::optional<int> footer_count;
  std::optional<std::string> count_warning;
};

struct RuntimeDiagnostic {
  std::string exception_class;  // pkg.segments.ClassName
  std::optional<std::string> detail;
  ErrorType error_type;  // kind == Runtime
};

enum class OutcomeState { NoCompile, CompiledWithRuntimeErrors, Clean };

struct OutcomeLabel {
  OutcomeState state = OutcomeState::Clean;
};

std::string to_string(OutcomeState state);

// Parses a javac-style output block: one or more
//   File.java:NN: error: message
// stanzas with source/caret context lines and an optional trailing
// "N error(s)" footer. Warning stanzas are skipped. Nonempty input with
// no parsable stanza is a ParseError; empty input parses to nothing.
CompilerParse parse_compiler_output(const std::string& raw);

// Parses a Java stack trace header of either form
//   Exception in thread "..." fq.Class: detail
//   fq.Class: detail
// followed by optional "at ..." frames. The detail (text after the first
// ": ") is optional.
RuntimeDiagnostic parse_runtime_trace(const std::string& raw);

// Normalizes a compiler first-line message into its canonical template:
// single-quoted identifier-shaped tokens are masked with a placeholder
// (quoted punctuation like ';' is kept) and whitespace is collapsed.
// Empty input canonicalizes to a flagged placeholder.
ErrorType canonicalize(const std::string& raw_message);

inline const std::string kIdPlaceholder = "⟨id⟩";      // ⟨id⟩
inline const std::string kEmptyPlaceholder = "⟨empty⟩";  // ⟨empty⟩

// Three-state outcome classification of a valid snapshot.
OutcomeLabel label_snapshot(const SnapshotEvent& event);

}  // namespace errql
