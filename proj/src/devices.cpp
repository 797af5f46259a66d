#include "memkit/devices.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "memkit/error.hpp"

namespace memkit {

std::string_view device_prefix(DeviceClass cls) {
  switch (cls) {
    case DeviceClass::resistor: return "R";
    case DeviceClass::conductor: return "G";
    case DeviceClass::capacitor: return "C";
    case DeviceClass::inductor: return "L";
    case DeviceClass::voltage_source: return "V";
    case DeviceClass::current_source: return "I";
    case DeviceClass::q_memristor: return "MQ";
    case DeviceClass::phi_memristor: return "MW";
    case DeviceClass::memcapacitor: return "MC";
    case DeviceClass::meminductor: return "ML";
    case DeviceClass::hybrid_m: return "HM";
    case DeviceClass::hybrid_w: return "HW";
  }
  return "?";
}

std::string_view device_class_name(DeviceClass cls) {
  switch (cls) {
    case DeviceClass::resistor: return "resistor (current-controlled)";
    case DeviceClass::conductor: return "resistor (voltage-controlled)";
    case DeviceClass::capacitor: return "capacitor";
    case DeviceClass::inductor: return "inductor";
    case DeviceClass::voltage_source: return "voltage source";
    case DeviceClass::current_source: return "current source";
    case DeviceClass::q_memristor: return "q-memristor";
    case DeviceClass::phi_memristor: return "phi-memristor";
    case DeviceClass::memcapacitor: return "memcapacitor";
    case DeviceClass::meminductor: return "meminductor";
    case DeviceClass::hybrid_m: return "hybrid memristor (current-controlled)";
    case DeviceClass::hybrid_w: return "hybrid memristor (voltage-controlled)";
  }
  return "?";
}

bool is_source(DeviceClass cls) {
  return cls == DeviceClass::voltage_source || cls == DeviceClass::current_source;
}

VarSet legal_inputs(DeviceClass cls) {
  switch (cls) {
    case DeviceClass::resistor: return {Var::i};
    case DeviceClass::conductor: return {Var::v};
    case DeviceClass::capacitor: return {Var::v};
    case DeviceClass::inductor: return {Var::i};
    case DeviceClass::voltage_source:
    case DeviceClass::current_source: return {Var::t};
    case DeviceClass::q_memristor: return {Var::q, Var::i};
    case DeviceClass::phi_memristor: return {Var::phi, Var::v};
    case DeviceClass::memcapacitor: return {Var::phi, Var::v};
    case DeviceClass::meminductor: return {Var::q, Var::i};
    case DeviceClass::hybrid_m: return {Var::q, Var::phi, Var::i};
    case DeviceClass::hybrid_w: return {Var::q, Var::phi, Var::v};
  }
  return {};
}

VarSet dynamic_variables(DeviceClass cls) {
  switch (cls) {
    case DeviceClass::capacitor:
    case DeviceClass::q_memristor: return {Var::q};
    case DeviceClass::inductor:
    case DeviceClass::phi_memristor: return {Var::phi};
    case DeviceClass::memcapacitor:
    case DeviceClass::meminductor:
    case DeviceClass::hybrid_m:
    case DeviceClass::hybrid_w: return {Var::q, Var::phi};
    default: return {};
  }
}

Var output_variable(DeviceClass cls) {
  switch (cls) {
    case DeviceClass::resistor:
    case DeviceClass::q_memristor:
    case DeviceClass::hybrid_m:
    case DeviceClass::voltage_source: return Var::v;
    case DeviceClass::conductor:
    case DeviceClass::phi_memristor:
    case DeviceClass::hybrid_w:
    case DeviceClass::current_source: return Var::i;
    case DeviceClass::capacitor:
    case DeviceClass::memcapacitor: return Var::q;
    case DeviceClass::inductor:
    case DeviceClass::meminductor: return Var::phi;
  }
  return Var::v;
}

Var incremental_variable(DeviceClass cls) {
  switch (cls) {
    case DeviceClass::resistor:
    case DeviceClass::inductor:
    case DeviceClass::q_memristor:
    case DeviceClass::meminductor:
    case DeviceClass::hybrid_m: return Var::i;
    case DeviceClass::conductor:
    case DeviceClass::capacitor:
    case DeviceClass::phi_memristor:
    case DeviceClass::memcapacitor:
    case DeviceClass::hybrid_w: return Var::v;
    case DeviceClass::voltage_source:
    case DeviceClass::current_source: break;
  }
  throw std::invalid_argument("sources have no incremental matrix");
}

Classification classify(DeviceClass cls) {
  Classification c;
  switch (cls) {
    case DeviceClass::resistor:
    case DeviceClass::conductor:
    case DeviceClass::voltage_source:
    case DeviceClass::current_source:
      c.differential_order = 0;
      c.state_order = 0;
      break;
    case DeviceClass::capacitor:
    case DeviceClass::inductor:
    case DeviceClass::q_memristor:
    case DeviceClass::phi_memristor:
      c.differential_order = 1;
      c.state_order = 1;
      break;
    case DeviceClass::memcapacitor:
    case DeviceClass::meminductor:
    case DeviceClass::hybrid_m:
    case DeviceClass::hybrid_w:
      c.differential_order = 1;
      c.state_order = 2;
      break;
  }
  c.controlling = is_source(cls) ? "independent (t)" : legal_inputs(cls).to_string();
  return c;
}

// ---------------------------------------------------------------------------

Characteristic Characteristic::affine(Var output, Affine form) { return Characteristic(output, form); }

Characteristic Characteristic::expression(Var output, Expr expr) { return Characteristic(output, std::move(expr)); }

VarSet Characteristic::reads() const {
  if (const auto* a = affine_form()) {
    VarSet out;
    for (Var v : {Var::q, Var::phi, Var::i, Var::v})
      if (a->coeff[static_cast<std::size_t>(v)] != 0.0) out.insert(v);
    return out;
  }
  return std::get<Expr>(form_).variables();
}

Expr Characteristic::as_expr() const {
  if (const auto* a = affine_form()) {
    Expr e = Expr::constant(a->offset);
    for (Var v : {Var::q, Var::phi, Var::i, Var::v}) {
      double c = a->coeff[static_cast<std::size_t>(v)];
      if (c != 0.0) e = e + Expr::constant(c) * Expr::variable(v);
    }
    return e;
  }
  return std::get<Expr>(form_);
}

double Characteristic::eval(const Point& point) const {
  if (const auto* a = affine_form()) {
    double r = a->offset + a->coeff[0] * point.q + a->coeff[1] * point.phi + a->coeff[2] * point.i +
               a->coeff[3] * point.v;
    if (!std::isfinite(r)) throw DomainError("characteristic evaluation: non-finite result");
    return r;
  }
  return std::get<Expr>(form_).eval(point);
}

Dual Characteristic::eval_dual(const Point& point) const {
  if (const auto* a = affine_form()) {
    Dual d;
    d.value = eval(point);
    d.grad = a->coeff;
    return d;
  }
  return std::get<Expr>(form_).eval_dual(point);
}

double eval_characteristic(const Characteristic& ch, const Point& point) { return ch.eval(point); }

double incremental_matrix(DeviceClass cls, const Characteristic& ch, const Point& point) {
  Var var = incremental_variable(cls);
  double d = ch.eval_dual(point).d(var);
  if (!std::isfinite(d)) throw DomainError("incremental matrix: non-finite derivative");
  return d;
}

std::vector<std::string> passivity_warnings(const DeviceSpec& device, const Point& point) {
  std::vector<std::string> out;
  if (is_source(device.cls) || !device.characteristic) return out;
  double d = incremental_matrix(device.cls, *device.characteristic, point);
  if (d <= 0.0) {
    out.push_back(device.name + ": incremental " + std::string(device_class_name(device.cls)) +
                  " parameter d" + std::string(var_name(device.characteristic->output())) + "/d" +
                  std::string(var_name(incremental_variable(device.cls))) + " = " + format_number(d) +
                  " is not positive");
  }
  return out;
}

// ---------------------------------------------------------------------------

SourceWaveform SourceWaveform::dc(double value) {
  SourceWaveform w;
  w.kind = Kind::dc;
  w.value = value;
  return w;
}

SourceWaveform SourceWaveform::sine(double amplitude, double frequency, double phase, double offset) {
  SourceWaveform w;
  w.kind = Kind::sine;
  w.amplitude = amplitude;
  w.frequency = frequency;
  w.phase = phase;
  w.offset = offset;
  return w;
}

double SourceWaveform::eval(double t) const {
  if (kind == Kind::dc) return value;
  return offset + amplitude * std::sin(2.0 * std::numbers::pi * frequency * t + phase);
}

// ---------------------------------------------------------------------------

namespace {

Expr var(Var v) { return Expr::variable(v); }
Expr num(double x) { return Expr::constant(x); }

DeviceSpec make_device(std::string name, DeviceClass cls, Expr expr, std::string builtin) {
  DeviceSpec d;
  d.name = std::move(name);
  d.cls = cls;
  d.characteristic = Characteristic::expression(output_variable(cls), std::move(expr));
  d.builtin = std::move(builtin);
  return d;
}

void require_reads(const Expr& e, VarSet allowed, const char* what) {
  if (!e.variables().subset_of(allowed))
    throw std::invalid_argument(std::string(what) + " may only read " + allowed.to_string());
}

}  // namespace

Expr default_flux_map() { return var(Var::q) + pow(var(Var::q), num(3.0)) / num(3.0); }

Expr default_charge_map() { return var(Var::phi) + pow(var(Var::phi), num(3.0)) / num(3.0); }

DeviceSpec chua_q_memristor(std::string name) {
  Expr memristance = default_flux_map().derivative(Var::q);
  return make_device(std::move(name), DeviceClass::q_memristor, memristance * var(Var::i), "chua_m");
}

DeviceSpec chua_phi_memristor(std::string name) {
  Expr memductance = default_charge_map().derivative(Var::phi);
  return make_device(std::move(name), DeviceClass::phi_memristor, memductance * var(Var::v), "chua_w");
}

DeviceSpec chua_series_hybrid(std::string name, const Expr& flux_map, const Expr& memductance) {
  require_reads(flux_map, {Var::q}, "flux map");
  require_reads(memductance, {Var::phi}, "memductance");
  if (memductance.is_constant() && memductance.constant_value() == 0.0)
    throw std::invalid_argument("memductance vanishes identically");
  Expr memristance = flux_map.derivative(Var::q);
  Expr shifted = memductance.substitute(Var::phi, var(Var::phi) - flux_map);
  return make_device(std::move(name), DeviceClass::hybrid_m, (memristance + num(1.0) / shifted) * var(Var::i), "");
}

DeviceSpec chua_parallel_hybrid(std::string name, const Expr& charge_map, const Expr& memristance) {
  require_reads(charge_map, {Var::phi}, "charge map");
  require_reads(memristance, {Var::q}, "memristance");
  if (memristance.is_constant() && memristance.constant_value() == 0.0)
    throw std::invalid_argument("memristance vanishes identically");
  Expr memductance = charge_map.derivative(Var::phi);
  Expr shifted = memristance.substitute(Var::q, var(Var::q) - charge_map);
  return make_device(std::move(name), DeviceClass::hybrid_w, (num(1.0) / shifted + memductance) * var(Var::v), "");
}

DeviceSpec josephson_memcapacitor(std::string name, double i1, double k1, double g, double c) {
  if (k1 == 0.0) throw std::invalid_argument("josephson_mc: k1 must be nonzero");
  Expr omega = num(i1 / k1) * sin(num(k1) * var(Var::phi)) + num(g) * var(Var::phi) + num(c) * var(Var::v);
  std::string builtin = "josephson_mc(" + format_number(i1) + ", " + format_number(k1) + ", " + format_number(g) +
                        ", " + format_number(c) + ")";
  return make_device(std::move(name), DeviceClass::memcapacitor, omega, std::move(builtin));
}

}  // namespace memkit
