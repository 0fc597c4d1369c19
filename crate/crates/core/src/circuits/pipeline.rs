use num_complex::Complex64;

use super::duplication::{build_duplication, DuplicationPlan};
use crate::error::{Error, Result};
use crate::kernels::{DistributionSet, Grid, MacroState, ScalarField, TensorField, VectorField};
use crate::lattice::LatticeModel;
use crate::quantum::{Control, GateOp, QubitSpan, RegisterLayout, StateVector};

/// Which collision diagonal a circuit carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircuitVariant {
    /// Input `rho`, diagonal `C f_eq / rho`.
    FsFlow,
    /// Input `T`, diagonal `C h_eq / T`.
    FsThermal,
    LksFlow,
    LksThermal,
    /// Input `rho`, flow diagonal weighted by `e_(alpha, axis)` so that the
    /// summed output is the momentum component `rho u_axis`.
    Momentum {
        axis: usize,
        lks: bool,
    },
}

impl CircuitVariant {
    pub fn is_thermal(self) -> bool {
        matches!(self, CircuitVariant::FsThermal | CircuitVariant::LksThermal)
    }

    pub fn is_lks(self) -> bool {
        matches!(
            self,
            CircuitVariant::LksFlow
                | CircuitVariant::LksThermal
                | CircuitVariant::Momentum { lks: true, .. }
        )
    }
}

/// Gradient inputs and constants of the lattice kinetic scheme diagonals.
#[derive(Debug, Clone)]
pub struct LksInputs {
    pub grad_u: TensorField,
    pub grad_t: Option<VectorField>,
    pub a: f64,
    pub b: f64,
}

/// An ordered gate list over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<GateOp>) -> Result<Self> {
        for g in &gates {
            g.validate(n_qubits)?;
        }
        Ok(Circuit { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = GateOp>) {
        self.gates.extend(gates);
    }

    /// Runs the circuit from `|0...0>`.
    pub fn run(&self) -> Result<StateVector> {
        let mut psi = StateVector::zero(self.n_qubits)?;
        psi.apply_all(&self.gates)?;
        Ok(psi)
    }
}

/// Everything needed to build one lattice circuit on a given grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QLbmCircuitPlan {
    layout: RegisterLayout,
    model: LatticeModel,
    duplication: DuplicationPlan,
    variant: CircuitVariant,
    summation: bool,
    rescale_constant: f64,
}

/// Register layout for `model` on `grid`; every extent must be a power of two.
pub fn plan_layout(model: &LatticeModel, grid: &Grid) -> Result<RegisterLayout> {
    RegisterLayout::for_grid(model, grid)
}

impl QLbmCircuitPlan {
    /// `summation` appends the moment-summation network (density, momentum or
    /// temperature readout); without it the circuit ends after streaming and
    /// is read per direction.
    pub fn new(
        model: &LatticeModel,
        grid: &Grid,
        variant: CircuitVariant,
        summation: bool,
    ) -> Result<Self> {
        let layout = plan_layout(model, grid)?;
        if let CircuitVariant::Momentum { axis, .. } = variant {
            if axis >= model.dims() {
                return Err(Error::InvalidParameter(format!(
                    "momentum axis {axis} in {}D",
                    model.dims()
                )));
            }
            if !summation {
                return Err(Error::InvalidParameter(
                    "momentum circuits are read through the summation network".into(),
                ));
            }
        }
        let mut plan = QLbmCircuitPlan {
            layout,
            model: model.clone(),
            duplication: build_duplication(model),
            variant,
            summation,
            rescale_constant: 1.0,
        };
        if summation {
            let hadamards = plan
                .summation_gates()
                .iter()
                .filter(|g| matches!(g, GateOp::Hadamard { .. }))
                .count();
            plan.rescale_constant = std::f64::consts::SQRT_2.powi(hadamards as i32);
        }
        Ok(plan)
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    pub fn duplication(&self) -> &DuplicationPlan {
        &self.duplication
    }

    pub fn variant(&self) -> CircuitVariant {
        self.variant
    }

    pub fn has_summation(&self) -> bool {
        self.summation
    }

    /// Factor that turns a read amplitude back into a physical value (before
    /// multiplying by the encoded field norm).
    pub fn rescale_constant(&self) -> f64 {
        self.rescale_constant
    }

    /// Length of the collision diagonal, `2^(nQ + N_init)`.
    pub fn diagonal_len(&self) -> usize {
        1 << (self.layout.n_q() + self.layout.n_init())
    }

    pub fn encode_gates(&self, input: &[f64]) -> Vec<GateOp> {
        vec![GateOp::AmplitudeLoad {
            span: self.layout.position_span(),
            values: input.to_vec(),
        }]
    }

    pub fn duplication_gates(&self) -> Vec<GateOp> {
        let offset = self.layout.n_init();
        self.duplication
            .gates()
            .iter()
            .map(|g| g.shifted(offset))
            .collect()
    }

    /// `H_a`, `B1` on the `a = 0` branch, `B2` on the `a = 1` branch, `H_a`.
    pub fn lcu_gates(&self, diag: &[f64]) -> Result<Vec<GateOp>> {
        if diag.len() != self.diagonal_len() {
            return Err(Error::InvalidParameter(format!(
                "collision diagonal has {} entries, expected {}",
                diag.len(),
                self.diagonal_len()
            )));
        }
        lcu_gates(
            self.layout.ancilla(),
            QubitSpan::new(0, self.layout.ancilla()),
            diag,
        )
    }

    pub fn streaming_gates(&self) -> Vec<GateOp> {
        streaming_gates(&self.model, &self.layout, self.duplication.subspace_map())
    }

    pub fn summation_gates(&self) -> Vec<GateOp> {
        summation_gates(&self.layout)
    }

    /// The complete circuit for an encoded `input` field and collision `diag`.
    pub fn build(&self, input: &[f64], diag: &[f64]) -> Result<Circuit> {
        let mut c = Circuit::new(self.layout.n_total());
        c.extend(self.encode_gates(input));
        c.extend(self.duplication_gates());
        c.extend(self.lcu_gates(diag)?);
        c.extend(self.streaming_gates());
        if self.summation {
            c.extend(self.summation_gates());
        }
        for g in c.gates() {
            g.validate(c.n_qubits())?;
        }
        Ok(c)
    }

    /// The field this circuit amplitude-encodes.
    pub fn input_field<'a>(&self, state: &'a MacroState) -> Result<&'a ScalarField> {
        if self.variant.is_thermal() {
            state.temperature.as_ref().ok_or_else(|| {
                Error::InvalidParameter("thermal circuit needs a temperature field".into())
            })
        } else {
            Ok(&state.rho)
        }
    }
}

fn controls_for(span: QubitSpan, state: usize) -> impl Iterator<Item = Control> {
    span.qubits().map(move |q| Control {
        qubit: q,
        value: state & (1 << (q - span.start)) != 0,
    })
}

/// LCU block encoding of the real diagonal `diag` on `span` with ancilla `a`.
pub fn lcu_gates(ancilla: usize, span: QubitSpan, diag: &[f64]) -> Result<Vec<GateOp>> {
    let mut b1 = Vec::with_capacity(diag.len());
    let mut b2 = Vec::with_capacity(diag.len());
    for (i, &d) in diag.iter().enumerate() {
        if !(d.abs() <= 1.0) {
            return Err(Error::InvalidGate(format!(
                "LCU diagonal entry {d} at index {i} lies outside [-1, 1]"
            )));
        }
        let s = (1.0 - d * d).sqrt();
        b1.push(Complex64::new(d, s));
        b2.push(Complex64::new(d, -s));
    }
    Ok(vec![
        GateOp::Hadamard { target: ancilla },
        GateOp::ControlledDiagonal {
            control: Control::zero(ancilla),
            span,
            diagonal: b1,
        },
        GateOp::ControlledDiagonal {
            control: Control::one(ancilla),
            span,
            diagonal: b2,
        },
        GateOp::Hadamard { target: ancilla },
    ])
}

/// Cyclic `+1` (`forward`) or `-1` shift of the register `span`, applied only
/// where all `extra` controls match: bit `j` flips when every lower bit reads
/// 1 (incrementer) or 0 (decrementer), highest bit first.
pub fn shift_gates(span: QubitSpan, forward: bool, extra: &[Control]) -> Vec<GateOp> {
    (0..span.len)
        .rev()
        .map(|j| {
            let mut controls: Vec<Control> = extra.to_vec();
            controls.extend((0..j).map(|l| Control {
                qubit: span.start + l,
                value: forward,
            }));
            GateOp::MultiControlledX {
                controls,
                target: span.start + j,
            }
        })
        .collect()
}

/// Streams each direction subspace by its lattice velocity (periodic wrap).
pub fn streaming_gates(
    model: &LatticeModel,
    layout: &RegisterLayout,
    subspace_map: &[usize],
) -> Vec<GateOp> {
    let dir = layout.direction_span();
    let mut gates = Vec::new();
    for (alpha, &s) in subspace_map.iter().enumerate() {
        let e = model.velocity(alpha);
        let sel: Vec<Control> = controls_for(dir, s).collect();
        for (d, &c) in e.iter().enumerate().take(layout.dims()) {
            if c != 0 {
                gates.extend(shift_gates(layout.axis_span(d), c > 0, &sel));
            }
        }
    }
    gates
}

/// Hadamards on every direction qubit and on the ancilla. The amplitude left on
/// `(a = 0, q_Q = 0)` is the sum over subspaces divided by `sqrt 2^(nQ + 1)`,
/// plus an imaginary part from the discarded LCU branch.
pub fn summation_gates(layout: &RegisterLayout) -> Vec<GateOp> {
    layout
        .direction_span()
        .qubits()
        .chain(std::iter::once(layout.ancilla()))
        .map(|target| GateOp::Hadamard { target })
        .collect()
}

/// Applies the LCU collision stage in place.
pub fn lcu_collision(state: &mut StateVector, layout: &RegisterLayout, diag: &[f64]) -> Result<()> {
    let gates = lcu_gates(layout.ancilla(), QubitSpan::new(0, layout.ancilla()), diag)?;
    state.apply_all(&gates)
}

/// Applies the streaming stage in place.
pub fn streaming(
    state: &mut StateVector,
    model: &LatticeModel,
    layout: &RegisterLayout,
    subspace_map: &[usize],
) -> Result<()> {
    state.apply_all(&streaming_gates(model, layout, subspace_map))
}

/// Applies the moment-summation stage in place.
pub fn macroscopic_sum(state: &mut StateVector, layout: &RegisterLayout) -> Result<()> {
    state.apply_all(&summation_gates(layout))
}

/// Moment field from the `(a = 0, q_Q = 0)` block: real part times
/// `rescale_constant * norm`.
pub fn read_density(
    state: &StateVector,
    plan: &QLbmCircuitPlan,
    norm: f64,
    grid: &Grid,
) -> Result<ScalarField> {
    let layout = plan.layout();
    let mut fixed: Vec<Control> = controls_for(layout.direction_span(), 0).collect();
    fixed.push(Control::zero(layout.ancilla()));
    let amps = state.project_read(&fixed)?;
    let scale = plan.rescale_constant() * norm;
    ScalarField::new(*grid, amps.iter().map(|a| a.re * scale).collect())
}

/// Post-streaming distributions from the `a = 0` branch, one subspace per
/// direction, scaled by `norm`.
pub fn read_distributions(
    state: &StateVector,
    plan: &QLbmCircuitPlan,
    norm: f64,
    grid: &Grid,
) -> Result<DistributionSet> {
    let layout = plan.layout();
    let amps = state.project_read(&[Control::zero(layout.ancilla())])?;
    let n = grid.node_count();
    let q = plan.model().q();
    let scale = plan.rescale_constant() * norm;
    let mut values = Vec::with_capacity(q * n);
    for alpha in 0..q {
        let s = plan.duplication().subspace(alpha);
        values.extend(amps[s * n..(s + 1) * n].iter().map(|a| a.re * scale));
    }
    DistributionSet::new(*grid, q, values)
}

/// Collision diagonal of `plan`'s variant for the current macro state:
/// entry `(subspace(alpha), k) = C_alpha * g_alpha(x_k)` with `g` the
/// equilibrium normalised by the encoded field. Unused subspaces get 0.
pub fn collision_diagonal(
    state: &MacroState,
    plan: &QLbmCircuitPlan,
    lks: Option<&LksInputs>,
) -> Result<Vec<f64>> {
    if !state.is_finite() {
        return Err(Error::NonFinite("macroscopic state"));
    }
    let variant = plan.variant();
    let lks = match (variant.is_lks(), lks) {
        (true, None) => {
            return Err(Error::InvalidParameter(format!(
                "{variant:?} needs LKS gradients and constants"
            )));
        }
        (true, Some(l)) => Some(l),
        (false, _) => None,
    };
    let grid = *state.grid();
    let model = plan.model();
    let dims = model.dims();
    let cs2 = model.cs2();
    let dt = grid.dt();
    let n = grid.node_count();
    if n != 1 << plan.layout().n_init() {
        return Err(Error::GridMismatch(format!(
            "{n} nodes for a {}-qubit position register",
            plan.layout().n_init()
        )));
    }
    let temperature = if variant.is_thermal() {
        let t = plan.input_field(state)?;
        if let Some((k, &v)) = t.values().iter().enumerate().find(|(_, &v)| !(v > 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "temperature {v} at node {k} must stay positive"
            )));
        }
        Some(t.values())
    } else {
        None
    };
    if let Some(l) = lks {
        grid.check_same(l.grad_u.grid())?;
        if variant == CircuitVariant::LksThermal {
            let g = l.grad_t.as_ref().ok_or_else(|| {
                Error::InvalidParameter("thermal LKS diagonal needs a temperature gradient".into())
            })?;
            grid.check_same(g.grid())?;
        }
    }
    let mut diag = vec![0.0; plan.diagonal_len()];
    for alpha in 0..model.q() {
        let e = model.velocity(alpha);
        let ef = [e[0] as f64, e[1] as f64, e[2] as f64];
        let w = model.weight(alpha);
        let c = plan.duplication().scale(alpha);
        let weight_axis = match variant {
            CircuitVariant::Momentum { axis, .. } => ef[axis],
            _ => 1.0,
        };
        let s = plan.duplication().subspace(alpha);
        let block = &mut diag[s * n..(s + 1) * n];
        if weight_axis == 0.0 {
            continue;
        }
        for (k, out) in block.iter_mut().enumerate() {
            let u = state.u.at(k);
            let eu: f64 = (0..dims).map(|d| ef[d] * u[d]).sum();
            let uu: f64 = (0..dims).map(|d| u[d] * u[d]).sum();
            let mut g = 1.0 + eu / cs2 + 0.5 * eu * eu / (cs2 * cs2) - 0.5 * uu / cs2;
            match (variant, lks) {
                (CircuitVariant::LksThermal, Some(l)) => {
                    let gt = l.grad_t.as_ref().expect("checked above");
                    let e_grad: f64 = (0..dims).map(|d| ef[d] * gt.component(d)[k]).sum();
                    g += l.b * dt * e_grad / temperature.expect("thermal")[k];
                }
                (CircuitVariant::LksFlow | CircuitVariant::Momentum { lks: true, .. }, Some(l)) => {
                    let mut strain = 0.0;
                    for i in 0..dims {
                        for j in 0..dims {
                            strain += ef[i]
                                * ef[j]
                                * (l.grad_u.component(i, j)[k] + l.grad_u.component(j, i)[k]);
                        }
                    }
                    g += l.a * dt * strain;
                }
                _ => {}
            }
            let value = c * weight_axis * w * g;
            if !(value.abs() <= 1.0) {
                return Err(Error::LcuInfeasible {
                    direction: alpha,
                    node: k,
                    value,
                });
            }
            *out = value;
        }
    }
    Ok(diag)
}
