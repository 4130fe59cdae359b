#include "emod/ops.hpp"

#include <string_view>

namespace emod {

const char* class_label(OpClass c) {
  switch (c) {
    case OpClass::Control: return "Control Ops";
    case OpClass::Function: return "Function Ops";
    case OpClass::Boolean: return "Boolean Ops";
    case OpClass::Arithmetic: return "Arithmetic Ops";
    case OpClass::Assignment: return "Assignments";
    case OpClass::ArrayReference: return "Array Reference";
    case OpClass::LibFunction: return "Lib Functions";
    case OpClass::Other: return "Other";
  }
  return "Other";
}

namespace {

bool has_prefix(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

}  // namespace

OpClass classify(std::string_view id) {
  if (has_prefix(id, "Lib:")) return OpClass::LibFunction;
  if (has_prefix(id, "BlockGoto_") || id == op::kMethodInvocation || id == op::kFieldReference)
    return OpClass::Control;
  if (has_prefix(id, "Parameter_") || has_prefix(id, "Return_")) return OpClass::Function;
  if (has_prefix(id, "Assign_")) return OpClass::Assignment;
  if (id == op::kArrayReference) return OpClass::ArrayReference;
  for (std::string_view p : {"Less_", "Greater_", "LessEqual_", "GreaterEqual_", "Equal_", "NotEqual_"})
    if (has_prefix(id, p)) return OpClass::Boolean;
  if (id == "And" || id == "Or" || id == op::kNot) return OpClass::Boolean;
  for (std::string_view p : {"Addition_", "Subtraction_", "Multi_", "Division_", "Remainder_", "Negation_"})
    if (has_prefix(id, p)) return OpClass::Arithmetic;
  if (id == op::kIncrement || id == op::kDecrement || id == "BitAnd" || id == "BitOr" ||
      id == "SignedBitShiftLeft" || id == "SignedBitShiftRight")
    return OpClass::Arithmetic;
  return OpClass::Other;
}

namespace op {

namespace {

std::string sig(const char* kind, Type a, Type b) {
  return std::string(kind) + "_" + to_string(a) + "_" + to_string(b);
}

}  // namespace

std::string binary(BinaryOp o, Type lhs, Type rhs) {
  switch (o) {
    case BinaryOp::Add: return sig("Addition", lhs, rhs);
    case BinaryOp::Sub: return sig("Subtraction", lhs, rhs);
    case BinaryOp::Mul: return sig("Multi", lhs, rhs);
    case BinaryOp::Div: return sig("Division", lhs, rhs);
    case BinaryOp::Rem: return sig("Remainder", lhs, rhs);
    case BinaryOp::Less: return sig("Less", lhs, rhs);
    case BinaryOp::Greater: return sig("Greater", lhs, rhs);
    case BinaryOp::LessEq: return sig("LessEqual", lhs, rhs);
    case BinaryOp::GreaterEq: return sig("GreaterEqual", lhs, rhs);
    case BinaryOp::Eq: return sig("Equal", lhs, rhs);
    case BinaryOp::NotEq: return sig("NotEqual", lhs, rhs);
    case BinaryOp::And: return "And";
    case BinaryOp::Or: return "Or";
    case BinaryOp::BitAnd: return "BitAnd";
    case BinaryOp::BitOr: return "BitOr";
    case BinaryOp::Shl: return "SignedBitShiftLeft";
    case BinaryOp::Shr: return "SignedBitShiftRight";
  }
  return "Unknown";
}

std::string negation(Type t) { return "Negation_" + to_string(t); }
std::string assign(Type target, Type value) { return sig("Assign", target, value); }
std::string declaration(Type t) { return "Declaration_" + to_string(t); }
std::string parameter(Type t) { return "Parameter_" + to_string(t); }
std::string ret(Type t) { return "Return_" + to_string(t); }
std::string conversion(Type from, Type to) { return sig("Conversion", from, to); }
std::string new_array(Type element) { return "NewArray_" + to_string(element); }
std::string lib(std::string_view qualified_name) { return "Lib:" + std::string(qualified_name); }

std::string block_goto(GotoKind k) {
  switch (k) {
    case GotoKind::If: return "BlockGoto_if";
    case GotoKind::For: return "BlockGoto_for";
    case GotoKind::While: return "BlockGoto_while";
    case GotoKind::None: break;
  }
  return "";
}

BinaryOp compound_binary(AssignOp a) {
  switch (a) {
    case AssignOp::Add: return BinaryOp::Add;
    case AssignOp::Sub: return BinaryOp::Sub;
    case AssignOp::Mul: return BinaryOp::Mul;
    case AssignOp::Div: return BinaryOp::Div;
    case AssignOp::Set: break;
  }
  return BinaryOp::Add;
}

}  // namespace op

}  // namespace emod
