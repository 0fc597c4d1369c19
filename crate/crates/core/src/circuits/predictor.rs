use serde::{Deserialize, Serialize};

use super::pipeline::{
    collision_diagonal, read_density, read_distributions, CircuitVariant, LksInputs,
    QLbmCircuitPlan,
};
use crate::error::{Error, Result};
use crate::kernels::{
    gradient_scalar, gradient_vector, moments, MacroState, ScalarField, VectorField,
};
use crate::lattice::LatticeModel;
use crate::quantum::StateVector;

/// Tolerance on `| |psi| - 1 |` after a full circuit.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Quantum predictor pipelines.
///
/// `*I` variants read every moment through its own summed circuit (density,
/// one per momentum component, temperature). `*II` variants run one circuit per
/// transported field and take moments classically from the read distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuantumMethod {
    FsI,
    FsII,
    LksI,
    LksII,
}

impl QuantumMethod {
    pub fn is_lks(self) -> bool {
        matches!(self, QuantumMethod::LksI | QuantumMethod::LksII)
    }

    pub fn multi_circuit(self) -> bool {
        matches!(self, QuantumMethod::FsI | QuantumMethod::LksI)
    }
}

/// Runs the quantum predictor and keeps an execution count of the circuits.
#[derive(Debug, Clone)]
pub struct QuantumPredictor {
    model: LatticeModel,
    executions: u64,
    max_norm_drift: f64,
}

impl QuantumPredictor {
    pub fn new(model: LatticeModel) -> Self {
        QuantumPredictor {
            model,
            executions: 0,
            max_norm_drift: 0.0,
        }
    }

    pub fn model(&self) -> &LatticeModel {
        &self.model
    }

    /// Circuits executed since construction or the last reset.
    pub fn executions(&self) -> u64 {
        self.executions
    }

    /// Largest `| |psi| - 1 |` seen over all executed circuits.
    pub fn max_norm_drift(&self) -> f64 {
        self.max_norm_drift
    }

    pub fn reset_counters(&mut self) {
        self.executions = 0;
        self.max_norm_drift = 0.0;
    }

    fn execute(
        &mut self,
        plan: &QLbmCircuitPlan,
        input: &ScalarField,
        diag: &[f64],
    ) -> Result<(StateVector, f64)> {
        let norm = input.norm();
        if norm == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let circuit = plan.build(input.values(), diag)?;
        let psi = circuit.run()?;
        self.executions += 1;
        let drift = (psi.norm() - 1.0).abs();
        self.max_norm_drift = self.max_norm_drift.max(drift);
        if !(drift <= NORM_TOLERANCE) {
            return Err(Error::InvalidGate(format!(
                "circuit norm drifted by {drift:e}"
            )));
        }
        Ok((psi, norm))
    }

    /// Runs one circuit with summation and returns the read moment field.
    fn summed(
        &mut self,
        state: &MacroState,
        variant: CircuitVariant,
        lks: Option<&LksInputs>,
    ) -> Result<ScalarField> {
        let grid = *state.grid();
        let plan = QLbmCircuitPlan::new(&self.model, &grid, variant, true)?;
        let input = plan.input_field(state)?.clone();
        let diag = collision_diagonal(state, &plan, lks)?;
        let (psi, norm) = self.execute(&plan, &input, &diag)?;
        read_density(&psi, &plan, norm, &grid)
    }

    /// Runs one circuit without summation and returns the post-streaming
    /// distributions.
    pub fn distributions(
        &mut self,
        state: &MacroState,
        variant: CircuitVariant,
        lks: Option<&LksInputs>,
    ) -> Result<crate::kernels::DistributionSet> {
        let grid = *state.grid();
        let plan = QLbmCircuitPlan::new(&self.model, &grid, variant, false)?;
        let input = plan.input_field(state)?.clone();
        let diag = collision_diagonal(state, &plan, lks)?;
        let (psi, norm) = self.execute(&plan, &input, &diag)?;
        read_distributions(&psi, &plan, norm, &grid)
    }

    /// Predictor step `(rho, u[, T]) -> (rho_bar, u_bar[, T_bar])`.
    ///
    /// `lks_constants` supplies `(A, B)` for the LKS methods; gradients are
    /// taken from `state` with the one-sided wall closure.
    pub fn predict(
        &mut self,
        state: &MacroState,
        method: QuantumMethod,
        lks_constants: Option<(f64, f64)>,
    ) -> Result<MacroState> {
        if state.grid().dims() != self.model.dims() {
            return Err(Error::GridMismatch(format!(
                "{}D grid for a {}D lattice",
                state.grid().dims(),
                self.model.dims()
            )));
        }
        let lks = if method.is_lks() {
            let (a, b) = lks_constants.ok_or_else(|| {
                Error::InvalidParameter("LKS predictor needs the constants A and B".into())
            })?;
            Some(LksInputs {
                grad_u: gradient_vector(&state.u),
                grad_t: state.temperature.as_ref().map(gradient_scalar),
                a,
                b,
            })
        } else {
            None
        };
        let lks_ref = lks.as_ref();
        let (flow, thermal) = if method.is_lks() {
            (CircuitVariant::LksFlow, CircuitVariant::LksThermal)
        } else {
            (CircuitVariant::FsFlow, CircuitVariant::FsThermal)
        };
        let grid = *state.grid();
        let (rho, u) = if method.multi_circuit() {
            let rho = self.summed(state, flow, lks_ref)?;
            let mut u = VectorField::zeros(grid);
            for d in 0..grid.dims() {
                let m = self.summed(
                    state,
                    CircuitVariant::Momentum {
                        axis: d,
                        lks: method.is_lks(),
                    },
                    lks_ref,
                )?;
                for ((out, mv), r) in u
                    .component_mut(d)
                    .iter_mut()
                    .zip(m.values())
                    .zip(rho.values())
                {
                    *out = mv / r;
                }
            }
            (rho, u)
        } else {
            let f = self.distributions(state, flow, lks_ref)?;
            let (rho, mut u) = moments(&f, &self.model);
            for d in 0..grid.dims() {
                for (v, r) in u.component_mut(d).iter_mut().zip(rho.values()) {
                    *v /= r;
                }
            }
            (rho, u)
        };
        let temperature = match &state.temperature {
            None => None,
            Some(_) if method.multi_circuit() => Some(self.summed(state, thermal, lks_ref)?),
            Some(_) => {
                let h = self.distributions(state, thermal, lks_ref)?;
                let mut t = ScalarField::constant(grid, 0.0);
                for alpha in 0..h.q() {
                    for (out, v) in t.values_mut().iter_mut().zip(h.direction(alpha)) {
                        *out += v;
                    }
                }
                Some(t)
            }
        };
        let out = MacroState {
            rho,
            u,
            temperature,
        };
        if !out.is_finite() {
            return Err(Error::NonFinite("quantum predictor output"));
        }
        Ok(out)
    }
}
