#include "tgm/datatype.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>

namespace tgm {

bool is_primitive(TypeKind k) {
  switch (k) {
    case TypeKind::Integer:
    case TypeKind::Decimal:
    case TypeKind::Text:
    case TypeKind::Boolean:
    case TypeKind::Date:
      return true;
    default:
      return false;
  }
}

bool is_collection(TypeKind k) {
  return k == TypeKind::Array || k == TypeKind::List || k == TypeKind::Set ||
         k == TypeKind::Bag;
}

const char* kind_name(TypeKind k) {
  switch (k) {
    case TypeKind::Integer: return "integer";
    case TypeKind::Decimal: return "decimal";
    case TypeKind::Text: return "text";
    case TypeKind::Boolean: return "boolean";
    case TypeKind::Date: return "date";
    case TypeKind::Range: return "range";
    case TypeKind::Enum: return "enum";
    case TypeKind::Record: return "record";
    case TypeKind::Array: return "array";
    case TypeKind::List: return "list";
    case TypeKind::Set: return "set";
    case TypeKind::Bag: return "bag";
    case TypeKind::Optional: return "optional";
    case TypeKind::Union: return "union";
  }
  return "?";
}

std::optional<TypeKind> kind_from_name(std::string_view name) {
  static const std::vector<TypeKind> all = {
      TypeKind::Integer, TypeKind::Decimal, TypeKind::Text,
      TypeKind::Boolean, TypeKind::Date,    TypeKind::Range,
      TypeKind::Enum,    TypeKind::Record,  TypeKind::Array,
      TypeKind::List,    TypeKind::Set,     TypeKind::Bag,
      TypeKind::Optional, TypeKind::Union};
  for (TypeKind k : all)
    if (name == kind_name(k)) return k;
  return std::nullopt;
}

DataType make_range(std::string label, TypeKind base, double lo, double hi) {
  DataType t;
  t.label = std::move(label);
  t.kind = TypeKind::Range;
  t.base = base;
  t.lo = lo;
  t.hi = hi;
  return t;
}

DataType make_enum(std::string label, std::vector<std::string> literals) {
  DataType t;
  t.label = std::move(label);
  t.kind = TypeKind::Enum;
  t.literals = std::move(literals);
  return t;
}

DataType make_record(std::string label, std::vector<RecordComponent> comps) {
  DataType t;
  t.label = std::move(label);
  t.kind = TypeKind::Record;
  t.components = std::move(comps);
  return t;
}

DataType make_array(std::string label, std::string element,
                    std::uint32_t length) {
  DataType t;
  t.label = std::move(label);
  t.kind = TypeKind::Array;
  t.element = std::move(element);
  t.length = length;
  return t;
}

DataType make_collection(std::string label, TypeKind kind, std::string element,
                         std::uint32_t occurs_min,
                         std::optional<std::uint32_t> occurs_max) {
  DataType t;
  t.label = std::move(label);
  t.kind = kind;
  t.element = std::move(element);
  t.occurs_min = occurs_min;
  t.occurs_max = occurs_max;
  return t;
}

DataType make_optional(std::string label, std::string element) {
  DataType t;
  t.label = std::move(label);
  t.kind = TypeKind::Optional;
  t.element = std::move(element);
  return t;
}

DataType make_union(std::string label, std::vector<std::string> variants) {
  DataType t;
  t.label = std::move(label);
  t.kind = TypeKind::Union;
  t.variants = std::move(variants);
  return t;
}

std::vector<std::pair<std::string, bool>> type_references(const DataType& t) {
  std::vector<std::pair<std::string, bool>> refs;
  switch (t.kind) {
    case TypeKind::Record:
      for (const auto& c : t.components) refs.emplace_back(c.type, false);
      break;
    case TypeKind::Array:
      refs.emplace_back(t.element, t.length == 0);
      break;
    case TypeKind::List:
    case TypeKind::Set:
    case TypeKind::Bag:
      refs.emplace_back(t.element, t.occurs_min == 0);
      break;
    case TypeKind::Optional:
      refs.emplace_back(t.element, true);
      break;
    case TypeKind::Union:
      for (const auto& v : t.variants) refs.emplace_back(v, false);
      break;
    default:
      break;
  }
  return refs;
}

TypeRegistry::TypeRegistry() {
  for (TypeKind k : {TypeKind::Integer, TypeKind::Decimal, TypeKind::Text,
                     TypeKind::Boolean, TypeKind::Date}) {
    DataType t;
    t.label = kind_name(k);
    t.kind = k;
    types_.emplace(t.label, std::move(t));
  }
  types_.emplace("empty_record", make_record("empty_record", {}));
  types_.emplace("anyType", make_union("anyType", {"integer", "decimal",
                                                   "text", "boolean",
                                                   "date"}));
}

const std::vector<std::string>& TypeRegistry::builtin_labels() {
  static const std::vector<std::string> labels = {
      "integer", "decimal", "text", "boolean", "date",
      "empty_record", "anyType"};
  return labels;
}

bool TypeRegistry::is_builtin(const std::string& label) {
  const auto& bs = builtin_labels();
  return std::find(bs.begin(), bs.end(), label) != bs.end();
}

void TypeRegistry::add(DataType t) {
  if (t.label.empty())
    throw TgmError("InvalidLabel", "type label must not be empty");
  auto it = types_.find(t.label);
  if (it != types_.end()) {
    if (it->second == t) return;  // identical redefinition is harmless
    throw TgmError("DuplicateLabel", "type '" + t.label +
                                         "' already registered with a "
                                         "different definition");
  }
  types_.emplace(t.label, std::move(t));
}

bool TypeRegistry::contains(const std::string& label) const {
  return types_.count(label) != 0;
}

const DataType* TypeRegistry::find(const std::string& label) const {
  auto it = types_.find(label);
  return it == types_.end() ? nullptr : &it->second;
}

const DataType& TypeRegistry::at(const std::string& label) const {
  const DataType* t = find(label);
  if (!t) throw TgmError("UnknownType", "type '" + label + "' is not registered");
  return *t;
}

namespace {

std::string format_bound(TypeKind base, double x) {
  if (base == TypeKind::Integer)
    return std::to_string(static_cast<long long>(std::llround(x)));
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string range_text(const DataType& t) {
  return format_bound(t.base, t.lo) + ".." + format_bound(t.base, t.hi);
}

void check_shape(const DataType& t, Verdict& out) {
  switch (t.kind) {
    case TypeKind::Range:
      if (t.base != TypeKind::Integer && t.base != TypeKind::Decimal)
        out.add("BadShape", t.label, "range base must be integer or decimal");
      if (t.lo > t.hi)
        out.add("InvalidBounds", t.label, "range " + range_text(t) + " is empty");
      if (t.base == TypeKind::Integer &&
          (t.lo != std::floor(t.lo) || t.hi != std::floor(t.hi)))
        out.add("InvalidBounds", t.label,
                "integer range bounds must be whole numbers");
      break;
    case TypeKind::Enum: {
      if (t.literals.empty())
        out.add("BadShape", t.label, "enum needs at least one literal");
      std::set<std::string> seen;
      for (const auto& l : t.literals)
        if (!seen.insert(l).second)
          out.add("DuplicateLiteral", t.label, "literal '" + l + "' repeats");
      break;
    }
    case TypeKind::Record: {
      std::set<std::string> seen;
      for (const auto& c : t.components) {
        if (c.name.empty())
          out.add("BadShape", t.label, "component with empty name");
        if (!seen.insert(c.name).second)
          out.add("DuplicateComponent", t.label,
                  "component '" + c.name + "' repeats");
      }
      break;
    }
    case TypeKind::Array:
    case TypeKind::List:
    case TypeKind::Set:
    case TypeKind::Bag:
    case TypeKind::Optional:
      if (t.element.empty())
        out.add("BadShape", t.label, "element type must be set");
      if ((t.kind == TypeKind::List || t.kind == TypeKind::Set ||
           t.kind == TypeKind::Bag) &&
          t.occurs_max && *t.occurs_max < t.occurs_min)
        out.add("InvalidBounds", t.label,
                "occurrence bounds " + std::to_string(t.occurs_min) + ".." +
                    std::to_string(*t.occurs_max) + " are empty");
      break;
    case TypeKind::Union: {
      if (t.variants.empty())
        out.add("BadShape", t.label, "union needs at least one variant");
      std::set<std::string> seen;
      for (const auto& v : t.variants)
        if (!seen.insert(v).second)
          out.add("DuplicateVariant", t.label, "variant '" + v + "' repeats");
      break;
    }
    default:
      break;
  }
}

void check_references(const TypeRegistry& reg, const DataType& t,
                      Verdict& out) {
  auto known = [&](const std::string& label) { return reg.contains(label); };
  if (t.kind == TypeKind::Record) {
    for (const auto& c : t.components)
      if (!c.type.empty() && !known(c.type))
        out.add("DanglingReference", t.label,
                "component '" + c.name + "' references unknown type '" +
                    c.type + "'");
  } else if (is_collection(t.kind) || t.kind == TypeKind::Optional) {
    if (!t.element.empty() && !known(t.element))
      out.add("DanglingReference", t.label,
              "element type '" + t.element + "' is not registered");
  } else if (t.kind == TypeKind::Union) {
    for (const auto& v : t.variants)
      if (!known(v))
        out.add("DanglingReference", t.label,
                "variant '" + v + "' is not registered");
  }
}

}  // namespace

Verdict TypeRegistry::check() const {
  Verdict out;
  for (const auto& [label, t] : types_) {
    check_shape(t, out);
    check_references(*this, t, out);
  }

  // Finite expansion: strongly connected components over the non-cut
  // reference edges. A cycle that never passes an optional or a possibly
  // empty collection has no finite value.
  std::map<std::string, int> index, low;
  std::vector<std::string> stack;
  std::set<std::string> on_stack, infinite;
  int counter = 0;
  std::function<void(const std::string&)> strongconnect =
      [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        const DataType& t = types_.at(v);
        for (const auto& [ref, cut] : type_references(t)) {
          if (cut || !types_.count(ref)) continue;
          if (!index.count(ref)) {
            strongconnect(ref);
            low[v] = std::min(low[v], low[ref]);
          } else if (on_stack.count(ref)) {
            low[v] = std::min(low[v], index[ref]);
          }
        }
        if (low[v] == index[v]) {
          std::vector<std::string> component;
          while (true) {
            std::string w = stack.back();
            stack.pop_back();
            on_stack.erase(w);
            component.push_back(w);
            if (w == v) break;
          }
          bool self_loop = false;
          for (const auto& [ref, cut] : type_references(t))
            if (!cut && ref == v) self_loop = true;
          if (component.size() > 1 || self_loop)
            infinite.insert(component.begin(), component.end());
        }
      };
  for (const auto& [label, t] : types_)
    if (!index.count(label)) strongconnect(label);

  for (const auto& label : infinite)
    out.add("InfiniteType", label,
            "type expansion never terminates; the reference cycle has no "
            "optional or possibly-empty collection");

  out.finalize();
  return out;
}

TypeRegistry register_type(const TypeRegistry& registry, const DataType& t) {
  TypeRegistry next = registry;
  next.add(t);
  Verdict verdict = next.check();
  if (!verdict.ok()) {
    const Violation& v = verdict.violations().front();
    throw TgmError(v.rule, v.element + ": " + v.message);
  }
  return next;
}

bool is_valid_date(std::string_view text) {
  int part[3] = {0, 0, 0};
  int digits[3] = {0, 0, 0};
  int slot = 0;
  for (char c : text) {
    if (c == '-') {
      if (++slot > 2) return false;
    } else if (c >= '0' && c <= '9') {
      part[slot] = part[slot] * 10 + (c - '0');
      ++digits[slot];
    } else {
      return false;
    }
  }
  if (slot != 2 || digits[0] != 4 || digits[1] < 1 || digits[1] > 2 ||
      digits[2] < 1 || digits[2] > 2)
    return false;
  int y = part[0], m = part[1], d = part[2];
  if (m < 1 || m > 12 || d < 1) return false;
  static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int dim = days[m - 1];
  bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  if (m == 2 && leap) dim = 29;
  return d <= dim;
}

namespace {

void check_value_rec(const TypeRegistry& reg, const DataType& t,
                     const Value& v, const std::string& path, Verdict& out);

void check_against(const TypeRegistry& reg, const std::string& label,
                   const Value& v, const std::string& path, Verdict& out) {
  const DataType* t = reg.find(label);
  if (!t) {
    out.add("DanglingReference", path,
            "type '" + label + "' is not registered");
    return;
  }
  check_value_rec(reg, *t, v, path, out);
}

bool matches_primitive(TypeKind k, const Value& v) {
  switch (k) {
    case TypeKind::Integer:
      return v.is_number_integer() || v.is_number_unsigned();
    case TypeKind::Decimal:
      return v.is_number();
    case TypeKind::Text:
      return v.is_string();
    case TypeKind::Boolean:
      return v.is_boolean();
    case TypeKind::Date:
      return v.is_string() && is_valid_date(v.get_ref<const std::string&>());
    default:
      return false;
  }
}

void check_value_rec(const TypeRegistry& reg, const DataType& t,
                     const Value& v, const std::string& path, Verdict& out) {
  switch (t.kind) {
    case TypeKind::Integer:
    case TypeKind::Decimal:
    case TypeKind::Text:
    case TypeKind::Boolean:
      if (!matches_primitive(t.kind, v))
        out.add("TypeShape", path,
                std::string("expected ") + kind_name(t.kind) + ", got " +
                    v.type_name());
      break;
    case TypeKind::Date:
      if (!matches_primitive(TypeKind::Date, v))
        out.add("TypeShape", path,
                "expected a calendar date (YYYY-MM-DD), got " +
                    (v.is_string() ? "'" + v.get<std::string>() + "'"
                                   : std::string(v.type_name())));
      break;
    case TypeKind::Range: {
      if (!matches_primitive(t.base, v)) {
        out.add("TypeShape", path,
                std::string("expected ") + kind_name(t.base) + ", got " +
                    v.type_name());
        break;
      }
      double x = v.get<double>();
      if (x < t.lo || x > t.hi)
        out.add("OutOfRange", path,
                v.dump() + " out of range " + range_text(t));
      break;
    }
    case TypeKind::Enum: {
      if (!v.is_string()) {
        out.add("TypeShape", path,
                std::string("expected enum literal, got ") + v.type_name());
        break;
      }
      const auto& s = v.get_ref<const std::string&>();
      if (std::find(t.literals.begin(), t.literals.end(), s) ==
          t.literals.end()) {
        std::string allowed;
        for (const auto& l : t.literals)
          allowed += (allowed.empty() ? "" : ", ") + l;
        out.add("NotInEnum", path,
                "'" + s + "' not one of [" + allowed + "]");
      }
      break;
    }
    case TypeKind::Record: {
      if (!v.is_object()) {
        out.add("TypeShape", path,
                std::string("expected record, got ") + v.type_name());
        break;
      }
      for (const auto& c : t.components) {
        auto it = v.find(c.name);
        if (it == v.end()) {
          const DataType* ct = reg.find(c.type);
          if (ct && ct->kind == TypeKind::Optional) continue;
          out.add("MissingComponent", path + "." + c.name,
                  "missing component '" + c.name + "'");
        } else {
          check_against(reg, c.type, *it, path + "." + c.name, out);
        }
      }
      for (auto it = v.begin(); it != v.end(); ++it) {
        bool declared = std::any_of(
            t.components.begin(), t.components.end(),
            [&](const RecordComponent& c) { return c.name == it.key(); });
        if (!declared)
          out.add("UnexpectedComponent", path + "." + it.key(),
                  "component '" + it.key() + "' is not declared on '" +
                      t.label + "'");
      }
      break;
    }
    case TypeKind::Array:
    case TypeKind::List:
    case TypeKind::Set:
    case TypeKind::Bag: {
      if (!v.is_array()) {
        out.add("TypeShape", path,
                std::string("expected ") + kind_name(t.kind) + ", got " +
                    v.type_name());
        break;
      }
      if (t.kind == TypeKind::Array) {
        if (v.size() != t.length)
          out.add("WrongLength", path,
                  "length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(t.length));
      } else {
        if (v.size() < t.occurs_min || (t.occurs_max && v.size() > *t.occurs_max))
          out.add("OccurrenceBound", path,
                  std::to_string(v.size()) + " elements, allowed " +
                      std::to_string(t.occurs_min) + ".." +
                      (t.occurs_max ? std::to_string(*t.occurs_max) : "*"));
      }
      for (std::size_t i = 0; i < v.size(); ++i)
        check_against(reg, t.element, v[i],
                      path + "[" + std::to_string(i) + "]", out);
      if (t.kind == TypeKind::Set) {
        for (std::size_t i = 0; i < v.size(); ++i)
          for (std::size_t j = i + 1; j < v.size(); ++j)
            if (v[i] == v[j])
              out.add("DuplicateInSet", path + "[" + std::to_string(j) + "]",
                      "duplicate of element " + std::to_string(i));
      }
      break;
    }
    case TypeKind::Optional:
      if (!v.is_null()) check_against(reg, t.element, v, path, out);
      break;
    case TypeKind::Union: {
      for (const auto& variant : t.variants) {
        const DataType* vt = reg.find(variant);
        if (!vt) continue;
        Verdict scratch;
        check_value_rec(reg, *vt, v, path, scratch);
        if (scratch.ok()) return;
      }
      out.add("NoUnionVariant", path,
              "no variant of '" + t.label + "' matches");
      break;
    }
  }
}

Value witness_rec(const TypeRegistry& reg, const DataType& t,
                  std::uint32_t salt);

Value witness_for(const TypeRegistry& reg, const std::string& label,
                  std::uint32_t salt) {
  return witness_rec(reg, reg.at(label), salt);
}

std::string date_witness(std::uint32_t salt) {
  // spread over days of January, then months
  std::uint32_t day = 1 + salt % 28, month = 1 + (salt / 28) % 12;
  char buf[16];
  std::snprintf(buf, sizeof buf, "2000-%02u-%02u", month, day);
  return buf;
}

Value witness_rec(const TypeRegistry& reg, const DataType& t,
                  std::uint32_t salt) {
  switch (t.kind) {
    case TypeKind::Integer: return static_cast<std::int64_t>(salt);
    case TypeKind::Decimal: return static_cast<double>(salt);
    case TypeKind::Text:
      return salt == 0 ? std::string()
                       : "w" + std::to_string(salt);
    case TypeKind::Boolean: return salt % 2 == 1;
    case TypeKind::Date: return date_witness(salt);
    case TypeKind::Range: {
      double x = t.lo + salt;
      if (x > t.hi)
        throw TgmError("UnsatisfiableType",
                       "range " + t.label + " has fewer than " +
                           std::to_string(salt + 1) + " values");
      if (t.base == TypeKind::Integer)
        return static_cast<std::int64_t>(std::llround(x));
      return x;
    }
    case TypeKind::Enum:
      if (salt >= t.literals.size())
        throw TgmError("UnsatisfiableType",
                       "enum " + t.label + " has fewer than " +
                           std::to_string(salt + 1) + " literals");
      return t.literals[salt];
    case TypeKind::Record: {
      Value v = Value::object();
      for (const auto& c : t.components) {
        const DataType& ct = reg.at(c.type);
        v[c.name] = ct.kind == TypeKind::Optional
                        ? Value(nullptr)
                        : witness_rec(reg, ct, salt);
      }
      return v;
    }
    case TypeKind::Array:
    case TypeKind::List:
    case TypeKind::Set:
    case TypeKind::Bag: {
      std::uint32_t n =
          t.kind == TypeKind::Array ? t.length : t.occurs_min;
      Value v = Value::array();
      for (std::uint32_t i = 0; i < n; ++i)
        v.push_back(witness_for(reg, t.element,
                                t.kind == TypeKind::Set ? salt + i : salt));
      if (t.kind == TypeKind::Set)
        for (std::size_t i = 0; i < v.size(); ++i)
          for (std::size_t j = i + 1; j < v.size(); ++j)
            if (v[i] == v[j])
              throw TgmError("UnsatisfiableType",
                             "set " + t.label +
                                 " cannot hold enough distinct elements");
      return v;
    }
    case TypeKind::Optional: return nullptr;
    case TypeKind::Union: return witness_for(reg, t.variants.at(0), salt);
  }
  return nullptr;
}

}  // namespace

Verdict check_value(const TypeRegistry& registry,
                    const std::string& type_label, const Value& value) {
  const DataType& t = registry.at(type_label);
  Verdict out;
  check_value_rec(registry, t, value, "$", out);
  out.finalize();
  return out;
}

Value witness_value(const TypeRegistry& registry,
                    const std::string& type_label) {
  return witness_for(registry, type_label, 0);
}

}  // namespace tgm
