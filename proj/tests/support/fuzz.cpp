#include "fuzz.hpp"

#include <sstream>
#include <vector>

#include "emod/random.hpp"

namespace emod::testing {

namespace {

enum class T { Int, Float, Bool, Char, Obj, IntArr, FloatArr, Void };

const char* spell(T t) {
  switch (t) {
    case T::Int: return "int";
    case T::Float: return "float";
    case T::Bool: return "boolean";
    case T::Char: return "char";
    case T::Obj: return "Object";
    case T::IntArr: return "int[]";
    case T::FloatArr: return "float[]";
    case T::Void: return "void";
  }
  return "void";
}

struct Var {
  std::string name;
  T type;
  bool writable;
};

struct Helper {
  std::string name;
  T ret;
  std::vector<T> params;
};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(Rng::derive(seed, 0x66757a7a)) {}

  std::string program() {
    out_ << "extern Math.sqrt(float) -> float;\n"
            "extern Math.abs(float) -> float;\n"
            "extern Math.max(float, float) -> float;\n"
            "extern FloatBuffer.get(int) -> float;\n"
            "extern FloatBuffer.put(float) -> void;\n"
            "extern GL10.glFlush(int) -> void;\n\n";
    globals_ = {{"gi", T::Int, true},     {"gf", T::Float, true},    {"gb", T::Bool, true},
                {"gc", T::Char, true},    {"go", T::Obj, true},      {"gia", T::IntArr, true},
                {"gfa", T::FloatArr, true}};
    out_ << "int gi = " << rng_.uniform_int(-5, 20) << ";\n";
    out_ << "float gf = " << rng_.uniform_int(0, 40) << ".5;\n";
    out_ << "boolean gb = " << (rng_.uniform() < 0.5 ? "true" : "false") << ";\n";
    out_ << "char gc = '" << static_cast<char>('a' + rng_.uniform_int(0, 25)) << "';\n";
    out_ << "Object go = null;\n";
    out_ << "int[] gia = new int[8];\n";
    out_ << "float[] gfa = new float[8];\n\n";

    int n_helpers = static_cast<int>(rng_.uniform_int(1, 4));
    std::vector<Helper> planned;
    for (int h = 0; h < n_helpers; ++h) {
      Helper hp{"h" + std::to_string(h), pick({T::Int, T::Float, T::Bool, T::Void}), {}};
      int np = static_cast<int>(rng_.uniform_int(0, 3));
      for (int p = 0; p < np; ++p) hp.params.push_back(pick({T::Int, T::Float, T::Bool, T::Char, T::IntArr}));
      planned.push_back(hp);
    }
    out_ << "class Util {\n";
    indent_ = 1;
    for (const auto& hp : planned) {
      std::vector<Var> params;
      for (std::size_t p = 0; p < hp.params.size(); ++p) params.push_back({"p" + std::to_string(p), hp.params[p], true});
      method(hp.ret, hp.name, params);
      helpers_.push_back(hp);
    }
    indent_ = 0;
    out_ << "}\n\n";

    method(T::Void, "init", {});
    method(T::Void, "update", {{"frame", T::Int, false}});
    method(T::Void, "onTap", {{"x", T::Int, true}, {"y", T::Int, true}});
    method(T::Void, "onKey", {{"code", T::Int, true}});
    return out_.str();
  }

 private:
  T pick(std::initializer_list<T> ts) {
    auto i = rng_.uniform_int(0, static_cast<std::int64_t>(ts.size()) - 1);
    return *(ts.begin() + i);
  }
  bool chance(double p) { return rng_.uniform() < p; }
  int roll(int lo, int hi) { return static_cast<int>(rng_.uniform_int(lo, hi)); }
  std::string fresh(const char* prefix) { return prefix + std::to_string(counter_++); }

  void line(const std::string& s) { out_ << std::string(2 * static_cast<std::size_t>(indent_), ' ') << s << '\n'; }

  std::vector<const Var*> vars(T t, bool writable_only) const {
    std::vector<const Var*> v;
    for (const auto& g : globals_)
      if (g.type == t && (!writable_only || g.writable)) v.push_back(&g);
    for (const auto& sc : scopes_)
      for (const auto& l : sc)
        if (l.type == t && (!writable_only || l.writable)) v.push_back(&l);
    return v;
  }

  const Var* any_var(T t, bool writable_only) {
    auto v = vars(t, writable_only);
    if (v.empty()) return nullptr;
    return v[static_cast<std::size_t>(roll(0, static_cast<int>(v.size()) - 1))];
  }

  std::string call(const Helper& h, int depth) {
    std::string s = "Util." + h.name + "(";
    for (std::size_t i = 0; i < h.params.size(); ++i) {
      if (i) s += ", ";
      s += expr(h.params[i], depth - 1);
    }
    return s + ")";
  }

  const Helper* helper_returning(T t) {
    std::vector<const Helper*> v;
    for (const auto& h : helpers_)
      if (h.ret == t) v.push_back(&h);
    if (v.empty()) return nullptr;
    return v[static_cast<std::size_t>(roll(0, static_cast<int>(v.size()) - 1))];
  }

  std::string leaf(T t) {
    const Var* v = chance(0.6) ? any_var(t, false) : nullptr;
    if (v) return v->name;
    switch (t) {
      case T::Int: return std::to_string(roll(-9, 40));
      case T::Float: return std::to_string(roll(-5, 30)) + "." + std::to_string(roll(0, 9));
      case T::Bool: return chance(0.5) ? "true" : "false";
      case T::Char: return std::string("'") + static_cast<char>('a' + roll(0, 25)) + "'";
      case T::Obj: return "null";
      case T::IntArr: return "gia";
      case T::FloatArr: return "gfa";
      case T::Void: break;
    }
    return "0";
  }

  std::string expr(T t, int depth) {
    if (depth <= 0 || chance(0.25)) return leaf(t);
    switch (t) {
      case T::Int: {
        switch (roll(0, 8)) {
          case 0: {
            const char* ops[] = {"+", "-", "*", "/", "%", "&", "|", "<<", ">>"};
            return "(" + expr(T::Int, depth - 1) + " " + ops[roll(0, 8)] + " " + expr(T::Int, depth - 1) + ")";
          }
          case 1: return "(int) " + expr(T::Float, depth - 1);
          case 2: return "(int) " + expr(T::Char, depth - 1);
          case 3: return expr(T::IntArr, 0) + "[" + expr(T::Int, depth - 1) + "]";
          case 4: return expr(T::IntArr, 0) + ".length";
          case 5: {
            const Helper* h = helper_returning(T::Int);
            if (h) return call(*h, depth);
            return "-(" + expr(T::Int, depth - 1) + ")";
          }
          case 6: {
            const Var* v = any_var(T::Int, true);
            if (v) return chance(0.5) ? v->name + (chance(0.5) ? "++" : "--") : std::string(chance(0.5) ? "++" : "--") + v->name;
            return leaf(T::Int);
          }
          case 7: return "(" + expr(T::Int, depth - 1) + " + " + expr(T::Int, depth - 1) + ")";
          default: return leaf(T::Int);
        }
      }
      case T::Float: {
        switch (roll(0, 8)) {
          case 0: {
            const char* ops[] = {"+", "-", "*", "/"};
            T a = pick({T::Float, T::Float, T::Int});
            T b = a == T::Int ? T::Float : pick({T::Float, T::Int});
            return "(" + expr(a, depth - 1) + " " + ops[roll(0, 3)] + " " + expr(b, depth - 1) + ")";
          }
          case 1: return "(float) " + expr(T::Int, depth - 1);
          case 2: return expr(T::FloatArr, 0) + "[" + expr(T::Int, depth - 1) + "]";
          case 3: return "Math.sqrt(" + expr(T::Float, depth - 1) + ")";
          case 4: return "Math.max(" + expr(T::Float, depth - 1) + ", " + expr(T::Float, depth - 1) + ")";
          case 5: return "FloatBuffer.get(" + expr(T::Int, depth - 1) + ")";
          case 6: {
            const Helper* h = helper_returning(T::Float);
            if (h) return call(*h, depth);
            return "Math.abs(" + expr(T::Float, depth - 1) + ")";
          }
          case 7: return "-(" + expr(T::Float, depth - 1) + ")";
          default: return leaf(T::Float);
        }
      }
      case T::Bool: {
        switch (roll(0, 7)) {
          case 0: case 1: {
            const char* ops[] = {"<", ">", "<=", ">=", "==", "!="};
            T a = pick({T::Int, T::Float, T::Char, T::Int});
            T b = a == T::Char ? T::Char : pick({T::Int, T::Float});
            return "(" + expr(a, depth - 1) + " " + ops[roll(0, 5)] + " " + expr(b, depth - 1) + ")";
          }
          case 2: return "(" + expr(T::Bool, depth - 1) + (chance(0.5) ? " && " : " || ") + expr(T::Bool, depth - 1) + ")";
          case 3: return "!" + expr(T::Bool, depth - 1);
          case 4: return "(" + expr(T::Obj, 0) + (chance(0.5) ? " == " : " != ") + "null)";
          case 5: return "(" + expr(T::Bool, depth - 1) + (chance(0.5) ? " == " : " != ") + expr(T::Bool, depth - 1) + ")";
          case 6: {
            const Helper* h = helper_returning(T::Bool);
            if (h) return call(*h, depth);
            return leaf(T::Bool);
          }
          default: return leaf(T::Bool);
        }
      }
      case T::Char:
        if (chance(0.3)) return "(char) (97 + (" + expr(T::Int, depth - 1) + ") % 26)";
        return leaf(T::Char);
      default: return leaf(t);
    }
  }

  void body(int budget, int depth) {
    scopes_.emplace_back();
    for (int i = 0; i < budget; ++i) stmt(depth);
    scopes_.pop_back();
  }

  void stmt(int depth) {
    int k = roll(0, depth > 0 ? 11 : 6);
    switch (k) {
      case 0: {
        T t = pick({T::Int, T::Float, T::Bool, T::Char, T::Obj, T::Int});
        std::string name = fresh("v");
        line(std::string(spell(t)) + " " + name + " = " + expr(t, 2) + ";");
        scopes_.back().push_back({name, t, true});
        break;
      }
      case 1: case 2: {
        T t = pick({T::Int, T::Float, T::Bool, T::Char, T::Obj, T::Int, T::Float});
        const Var* v = any_var(t, true);
        if (!v) {
          line("gi = " + expr(T::Int, 2) + ";");
        } else if ((t == T::Int || t == T::Float) && chance(0.4)) {
          const char* ops[] = {"+=", "-=", "*=", "/="};
          line(v->name + " " + ops[roll(0, 3)] + " " + expr(t == T::Float ? pick({T::Float, T::Int}) : T::Int, 2) + ";");
        } else {
          line(v->name + " = " + expr(t == T::Float ? pick({T::Float, T::Int}) : t, 2) + ";");
        }
        break;
      }
      case 3:
        if (chance(0.5))
          line("gia[" + expr(T::Int, 1) + "] = " + expr(T::Int, 2) + ";");
        else
          line("gfa[" + expr(T::Int, 1) + "] = " + expr(T::Float, 2) + ";");
        break;
      case 4: {
        const Var* v = any_var(T::Int, true);
        if (v) line(chance(0.5) ? v->name + "++;" : "--" + v->name + ";");
        else line("gi++;");
        break;
      }
      case 5:
        if (!helpers_.empty() && chance(0.6))
          line(call(helpers_[static_cast<std::size_t>(roll(0, static_cast<int>(helpers_.size()) - 1))], 2) + ";");
        else if (chance(0.5))
          line("FloatBuffer.put(" + expr(T::Float, 2) + ");");
        else
          line("GL10.glFlush(" + expr(T::Int, 2) + ");");
        break;
      case 6:
        if (ret_ != T::Void && chance(0.3)) {
          line("if (" + expr(T::Bool, 2) + ") {");
          ++indent_;
          body(roll(0, 1), 0);
          line("return " + expr(ret_, 2) + ";");
          --indent_;
          line("}");
        } else {
          line("gb = " + expr(T::Bool, 2) + ";");
        }
        break;
      case 7: case 8: {
        line("if (" + expr(T::Bool, 2) + ") {");
        ++indent_;
        body(roll(1, 3), depth - 1);
        --indent_;
        if (chance(0.5)) {
          line("} else {");
          ++indent_;
          body(roll(1, 3), depth - 1);
          --indent_;
        }
        line("}");
        break;
      }
      case 9: {
        std::string i = fresh("i");
        int n = roll(1, 4);
        switch (roll(0, 2)) {
          case 0: line("for (int " + i + " = 0; " + i + " < " + std::to_string(n) + "; " + i + "++) {"); break;
          case 1: line("for (int " + i + " = " + std::to_string(n) + "; " + i + " > 0; " + i + "--) {"); break;
          default: line("for (int " + i + " = 0; " + i + " <= " + std::to_string(2 * n) + "; " + i + " = " + i + " + 2) {"); break;
        }
        ++indent_;
        scopes_.push_back({{i, T::Int, false}});
        body(roll(1, 3), depth - 1);
        scopes_.pop_back();
        --indent_;
        line("}");
        break;
      }
      case 10: {
        std::string w = fresh("w");
        line("int " + w + " = 0;");
        scopes_.back().push_back({w, T::Int, false});
        line("while (" + w + "++ < " + std::to_string(roll(1, 4)) + ") {");
        ++indent_;
        body(roll(1, 3), depth - 1);
        --indent_;
        line("}");
        break;
      }
      default: {
        line("switch (" + expr(T::Int, 1) + " % 3) {");
        int cases = roll(1, 3);
        for (int c = 0; c < cases; ++c) {
          line("  case " + std::to_string(c) + ":");
          indent_ += 2;
          body(roll(1, 2), depth - 1);
          indent_ -= 2;
        }
        if (chance(0.5)) {
          line("  default:");
          indent_ += 2;
          body(1, depth - 1);
          indent_ -= 2;
        }
        line("}");
        break;
      }
    }
  }

  void method(T ret, const std::string& name, const std::vector<Var>& params) {
    std::string sig = std::string(spell(ret)) + " " + name + "(";
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i) sig += ", ";
      sig += std::string(spell(params[i].type)) + " " + params[i].name;
    }
    line(sig + ") {");
    ++indent_;
    ret_ = ret;
    scopes_.push_back(params);
    body(roll(2, 6), 2);
    if (ret != T::Void) line("return " + expr(ret, 2) + ";");
    scopes_.pop_back();
    --indent_;
    line("}");
    line("");
  }

  Rng rng_;
  std::ostringstream out_;
  int indent_ = 0;
  int counter_ = 0;
  T ret_ = T::Void;
  std::vector<Var> globals_;
  std::vector<std::vector<Var>> scopes_;
  std::vector<Helper> helpers_;
};

}  // namespace

std::string random_program(std::uint64_t seed) { return Gen(seed).program(); }

}  // namespace emod::testing
