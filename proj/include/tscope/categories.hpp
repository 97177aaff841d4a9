#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "tscope/errors.hpp"

namespace tscope {

// Order matters: it is the classifier output order and the tie-break order.
enum class EntityCategory : std::size_t { Component = 0, Behavior, Prerequisite, Manner, Constraint };
enum class RelationCategory : std::size_t { Act = 0, Require, Use, Satisfy };

inline constexpr std::size_t kEntityCategoryCount = 5;
inline constexpr std::size_t kRelationCategoryCount = 4;
// Classifier heads carry one extra "none" class at the end.
inline constexpr std::size_t kEntityClassCount = kEntityCategoryCount + 1;
inline constexpr std::size_t kRelationClassCount = kRelationCategoryCount + 1;
inline constexpr std::size_t kEntityNone = kEntityCategoryCount;
inline constexpr std::size_t kRelationNone = kRelationCategoryCount;

inline constexpr std::array<EntityCategory, kEntityCategoryCount> kAllEntityCategories = {
    EntityCategory::Component, EntityCategory::Behavior, EntityCategory::Prerequisite,
    EntityCategory::Manner, EntityCategory::Constraint};

inline constexpr std::array<RelationCategory, kRelationCategoryCount> kAllRelationCategories = {
    RelationCategory::Act, RelationCategory::Require, RelationCategory::Use, RelationCategory::Satisfy};

constexpr std::size_t index_of(EntityCategory c) { return static_cast<std::size_t>(c); }
constexpr std::size_t index_of(RelationCategory c) { return static_cast<std::size_t>(c); }

constexpr std::string_view to_string(EntityCategory c) {
  constexpr std::array<std::string_view, kEntityCategoryCount> names = {
      "Component", "Behavior", "Prerequisite", "Manner", "Constraint"};
  return names[index_of(c)];
}

constexpr std::string_view to_string(RelationCategory c) {
  constexpr std::array<std::string_view, kRelationCategoryCount> names = {"Act", "Require", "Use", "Satisfy"};
  return names[index_of(c)];
}

inline std::optional<EntityCategory> parse_entity_category(std::string_view s) {
  for (auto c : kAllEntityCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

inline std::optional<RelationCategory> parse_relation_category(std::string_view s) {
  for (auto c : kAllRelationCategories)
    if (to_string(c) == s) return c;
  return std::nullopt;
}

// Type-compatibility mask: every relation links one non-Component head to a Component.
// Act<->Behavior, Require<->Prerequisite, Use<->Manner, Satisfy<->Constraint.
constexpr std::optional<RelationCategory> relation_for_head(EntityCategory head) {
  switch (head) {
    case EntityCategory::Behavior: return RelationCategory::Act;
    case EntityCategory::Prerequisite: return RelationCategory::Require;
    case EntityCategory::Manner: return RelationCategory::Use;
    case EntityCategory::Constraint: return RelationCategory::Satisfy;
    case EntityCategory::Component: break;
  }
  return std::nullopt;
}

constexpr EntityCategory head_for_relation(RelationCategory r) {
  switch (r) {
    case RelationCategory::Act: return EntityCategory::Behavior;
    case RelationCategory::Require: return EntityCategory::Prerequisite;
    case RelationCategory::Use: return EntityCategory::Manner;
    case RelationCategory::Satisfy: return EntityCategory::Constraint;
  }
  return EntityCategory::Behavior;
}

constexpr bool compatible(RelationCategory r, EntityCategory head, EntityCategory tail) {
  return tail == EntityCategory::Component && head_for_relation(r) == head;
}

}  // namespace tscope
