#pragma once

#include <array>
#include <string>
#include <string_view>

#include "emod/ast.hpp"

namespace emod {

/// The eight operation classes used for block breakdowns.
enum class OpClass : std::uint8_t {
  Control,
  Function,
  Boolean,
  Arithmetic,
  Assignment,
  ArrayReference,
  LibFunction,
  Other,
};

inline constexpr std::size_t kNumOpClasses = 8;
inline constexpr std::array<OpClass, kNumOpClasses> kAllOpClasses = {
    OpClass::Control,    OpClass::Function,       OpClass::Boolean,     OpClass::Arithmetic,
    OpClass::Assignment, OpClass::ArrayReference, OpClass::LibFunction, OpClass::Other};

/// Display label, e.g. "Control Ops".
const char* class_label(OpClass c);

/// Class tag of an operation id. Every id maps to exactly one class.
OpClass classify(std::string_view op_id);

/// A typed energy operation: the unit the cost model assigns a price to.
struct EnergyOp {
  std::string id;
  OpClass cls = OpClass::Other;
};

enum class GotoKind : std::uint8_t { None, If, For, While };

namespace op {

inline constexpr const char* kMethodInvocation = "MethodInvocation";
inline constexpr const char* kFieldReference = "FieldReference";
inline constexpr const char* kArrayReference = "ArrayReference";
inline constexpr const char* kIncrement = "Increment";
inline constexpr const char* kDecrement = "Decrement";
inline constexpr const char* kNot = "Not";
inline constexpr const char* kGC = "Lib:GC";

std::string binary(BinaryOp o, Type lhs, Type rhs);
std::string negation(Type t);
std::string assign(Type target, Type value);
std::string declaration(Type t);
std::string parameter(Type t);
std::string ret(Type t);
std::string conversion(Type from, Type to);
std::string new_array(Type element);
std::string lib(std::string_view qualified_name);
std::string block_goto(GotoKind k);

/// Arithmetic operation performed by a compound assignment (`+=` → Add).
BinaryOp compound_binary(AssignOp a);

}  // namespace op

}  // namespace emod
