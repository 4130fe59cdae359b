#pragma once

#include <cstdint>
#include <string>

namespace emod {

enum class BaseType : std::uint8_t { Void, Int, Float, Char, Boolean, Object, Null };

/// A MiniJ static type: a base type, optionally as a one-dimensional array.
struct Type {
  BaseType base = BaseType::Void;
  bool array = false;

  constexpr Type() = default;
  constexpr Type(BaseType b, bool arr = false) : base(b), array(arr) {}

  static constexpr Type Void() { return {BaseType::Void}; }
  static constexpr Type Int() { return {BaseType::Int}; }
  static constexpr Type Float() { return {BaseType::Float}; }
  static constexpr Type Char() { return {BaseType::Char}; }
  static constexpr Type Boolean() { return {BaseType::Boolean}; }
  static constexpr Type Object() { return {BaseType::Object}; }
  static constexpr Type Null() { return {BaseType::Null}; }

  constexpr bool is_void() const { return !array && base == BaseType::Void; }
  constexpr bool is_numeric() const {
    return !array && (base == BaseType::Int || base == BaseType::Float);
  }
  constexpr bool is_int() const { return !array && base == BaseType::Int; }
  constexpr bool is_float() const { return !array && base == BaseType::Float; }
  constexpr bool is_char() const { return !array && base == BaseType::Char; }
  constexpr bool is_boolean() const { return !array && base == BaseType::Boolean; }
  constexpr bool is_null() const { return !array && base == BaseType::Null; }
  /// Types whose values are handles (arrays, Object) or the null literal.
  constexpr bool is_reference() const {
    return array || base == BaseType::Object || base == BaseType::Null;
  }
  constexpr Type element() const { return {base, false}; }

  friend constexpr bool operator==(Type, Type) = default;
};

/// Spelling used in source and in operation ids: "int", "float[]", "Object", "null".
std::string to_string(Type t);

/// Whether a value of type `from` may be stored into a slot of type `to` without a cast.
bool assignable(Type to, Type from);

}  // namespace emod
