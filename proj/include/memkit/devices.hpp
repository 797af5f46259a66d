#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "memkit/expr.hpp"

namespace memkit {

// Branch device kinds of a first-order circuit. The comment after each tag is
// the subscript its currents and charges carry in the nodal model.
enum class DeviceClass {
  resistor,         // r: v = gamma_r(i), current-controlled
  conductor,        // g: i = gamma_g(v), voltage-controlled resistor
  capacitor,        // c: q = gamma_c(v)
  inductor,         // l: phi = gamma_l(i)
  voltage_source,   // u
  current_source,   // j
  q_memristor,      // m: v = eta(q, i)
  phi_memristor,    // w: i = zeta(phi, v)
  memcapacitor,     // mc: q = omega(phi, v)
  meminductor,      // ml: phi = theta(q, i)
  hybrid_m,         // hm: v = psi(q, phi, i), current-controlled hybrid memristor
  hybrid_w,         // hw: i = xi(q, phi, v), voltage-controlled hybrid memristor
};

inline constexpr std::array<DeviceClass, 12> kAllDeviceClasses = {
    DeviceClass::resistor,      DeviceClass::conductor,     DeviceClass::capacitor,
    DeviceClass::inductor,      DeviceClass::voltage_source, DeviceClass::current_source,
    DeviceClass::q_memristor,   DeviceClass::phi_memristor, DeviceClass::memcapacitor,
    DeviceClass::meminductor,   DeviceClass::hybrid_m,      DeviceClass::hybrid_w};

// Netlist prefix ("R", "MQ", "HW", ...).
std::string_view device_prefix(DeviceClass cls);
// Human-readable name ("q-memristor").
std::string_view device_class_name(DeviceClass cls);

struct Classification {
  int differential_order = 0;
  int state_order = 0;
  std::string controlling;

  bool operator==(const Classification&) const = default;
};

Classification classify(DeviceClass cls);

bool is_source(DeviceClass cls);

// Charge and/or flux variables the device contributes to the circuit state;
// its size equals the state order.
VarSet dynamic_variables(DeviceClass cls);

// Variables the constitutive relation of `cls` may read, and the one it yields.
VarSet legal_inputs(DeviceClass cls);
Var output_variable(DeviceClass cls);
// The port variable whose partial derivative defines the incremental
// resistance, memristance, capacitance, ... of the class.
Var incremental_variable(DeviceClass cls);

// output = offset + sum_k coeff[k] * (q, phi, i, v)[k]
struct Affine {
  double offset = 0.0;
  std::array<double, 4> coeff{};
};

// Time-invariant constitutive map of a device. Immutable.
class Characteristic {
 public:
  static Characteristic affine(Var output, Affine form);
  static Characteristic expression(Var output, Expr expr);

  Var output() const { return output_; }
  VarSet reads() const;

  bool is_affine() const { return std::holds_alternative<Affine>(form_); }
  const Affine* affine_form() const { return std::get_if<Affine>(&form_); }
  // Affine forms are converted on the fly.
  Expr as_expr() const;

  double eval(const Point& point) const;
  Dual eval_dual(const Point& point) const;

 private:
  Characteristic(Var output, std::variant<Affine, Expr> form) : output_(output), form_(std::move(form)) {}

  Var output_;
  std::variant<Affine, Expr> form_;
};

struct SourceWaveform {
  enum class Kind { dc, sine };
  Kind kind = Kind::dc;
  double value = 0.0;  // dc level
  double amplitude = 0.0;
  double frequency = 0.0;  // Hz
  double phase = 0.0;      // radians
  double offset = 0.0;

  static SourceWaveform dc(double value);
  static SourceWaveform sine(double amplitude, double frequency, double phase = 0.0, double offset = 0.0);

  // offset + amplitude * sin(2 pi frequency t + phase) for sine sources.
  double eval(double t) const;
};

// One device: class, name and either a characteristic or a source waveform.
// `builtin` records the library constructor invocation (e.g.
// "josephson_mc(1, 1, 0.5, 1)") so that netlists print back compactly.
struct DeviceSpec {
  std::string name;
  DeviceClass cls = DeviceClass::resistor;
  std::optional<Characteristic> characteristic;
  std::optional<SourceWaveform> source;
  std::string builtin;
};

double eval_characteristic(const Characteristic& ch, const Point& point);

// Incremental resistance/conductance/capacitance/... of a device of class
// `cls` at `point`: the partial derivative of its characteristic with respect
// to incremental_variable(cls). Throws std::invalid_argument for sources and
// DomainError on a non-finite derivative.
double incremental_matrix(DeviceClass cls, const Characteristic& ch, const Point& point);

// Non-fatal notes raised when a device is not strictly locally passive at a
// point (non-positive incremental matrix).
std::vector<std::string> passivity_warnings(const DeviceSpec& device, const Point& point);

// Builtin constructors.

// Chua charge-controlled memristor v = phi'(q) i with the flux map
// phi(q) = q + q^3/3, so M(q) = 1 + q^2.
DeviceSpec chua_q_memristor(std::string name);
// Chua flux-controlled memristor i = gamma'(phi) v with gamma(phi) = phi + phi^3/3.
DeviceSpec chua_phi_memristor(std::string name);

// Flux map phi(q) and charge map gamma(phi) used by the builtins.
Expr default_flux_map();    // in q
Expr default_charge_map();  // in phi

// Series connection of a charge-controlled memristor with flux map phi(q)
// and a flux-controlled memristor with memductance W(phi):
//   v = [phi'(q) + 1 / W(phi - phi(q))] i.
// `flux_map` must read only q and `memductance` only phi.
DeviceSpec chua_series_hybrid(std::string name, const Expr& flux_map, const Expr& memductance);
// Parallel connection of a flux-controlled memristor with charge map gamma(phi)
// and a charge-controlled memristor with memristance M(q):
//   i = [1 / M(q - gamma(phi)) + gamma'(phi)] v.
DeviceSpec chua_parallel_hybrid(std::string name, const Expr& charge_map, const Expr& memristance);

// Memcapacitor q = (I1/k1) sin(k1 phi) + G phi + C v. Rejects k1 = 0.
DeviceSpec josephson_memcapacitor(std::string name, double i1, double k1, double g, double c);

}  // namespace memkit
