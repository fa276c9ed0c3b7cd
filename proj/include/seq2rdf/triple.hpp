#pragma once

#include <compare>
#include <string>

namespace seq2rdf {

// (subject, predicate, object) symbols in a KG vocabulary, e.g.
// (dbr:Germany, dbo:capital, dbr:Berlin).
struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;

  auto operator<=>(const Triple&) const = default;
  bool operator==(const Triple&) const = default;

  bool valid() const { return !subject.empty() && !predicate.empty() && !object.empty(); }
};

}  // namespace seq2rdf
