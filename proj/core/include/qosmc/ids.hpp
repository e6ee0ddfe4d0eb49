#pragma once

#include <compare>
#include <functional>
#include <ostream>
#include <string>
#include <utility>

namespace qosmc {

// String-backed identifier with a phantom tag so participants, states and
// messages cannot be mixed up.
template <typename Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {}

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Id& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

struct ParticipantTag {};
struct StateTag {};
struct MessageTag {};
struct AttributeTag {};

using ParticipantId = Id<ParticipantTag>;
using StateId = Id<StateTag>;
using MessageType = Id<MessageTag>;
// Element of the global attribute set (cost, time, memory, ...).
using Attribute = Id<AttributeTag>;

// Identifiers accepted by every concrete syntax: [A-Za-z][A-Za-z0-9_]*.
bool is_identifier(const std::string& s);

// Identifiers that can be joined with "__" without ambiguity: no "__" inside
// and no trailing underscore.
bool is_mangle_safe(const std::string& s);

}  // namespace qosmc

template <typename Tag>
struct std::hash<qosmc::Id<Tag>> {
  std::size_t operator()(const qosmc::Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};
