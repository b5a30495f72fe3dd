use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::LieGroup;
use crate::linalg::central_difference;
use crate::scalar::Real;

/// Step used by the default finite-difference linearizations.
pub const FD_STEP: f64 = 1e-6;

/// A discrete-time system on a homogeneous space together with its symmetry.
///
/// Implementors supply the transition `F`, the state action `φ` (a right
/// action), the input action `ψ`, an equivariant lift `Λ`, the output map and
/// a chart `Θ` of the state space centred at a fixed origin `ξ°`.
///
/// Tangent vectors at `ξ°` are represented as vectors of length
/// [`state_dim`](Self::state_dim), the same length as chart coordinates.
pub trait EquivariantSystem<T: Real> {
    type Group: LieGroup<T>;
    type State: Clone + std::fmt::Debug;
    type Input: Clone + std::fmt::Debug;

    /// Dimension `m` of the state space.
    fn state_dim(&self) -> usize;

    /// Dimension `n` of the stacked output vector.
    fn output_dim(&self) -> usize;

    fn origin(&self) -> &Self::State;

    /// `F(ξ, u)`.
    fn transition(&self, xi: &Self::State, u: &Self::Input) -> Self::State;

    /// `φ(X, ξ)`.
    fn act_state(&self, x: &Self::Group, xi: &Self::State) -> Self::State;

    /// `ψ(X, u)`.
    fn act_input(&self, x: &Self::Group, u: &Self::Input) -> Self::Input;

    /// `Λ(ξ, u)`, satisfying `φ(Λ(ξ, u), ξ) = F(ξ, u)`.
    fn lift(&self, xi: &Self::State, u: &Self::Input) -> Result<Self::Group>;

    /// Stacked outputs `h(ξ)`.
    fn output(&self, xi: &Self::State) -> Result<DVector<T>>;

    /// Inverse chart `Θ⁻¹`: local coordinates to a state near the origin.
    fn chart(&self, eps: &DVector<T>) -> Result<Self::State>;

    /// Chart `Θ`: state near the origin to local coordinates.
    fn chart_inv(&self, xi: &Self::State) -> Result<DVector<T>>;

    /// `DΘ⁻¹` at zero, mapping chart coordinates to tangent vectors at `ξ°`.
    fn chart_differential(&self) -> DMatrix<T>;

    /// `Dφ_{ξ°}(id)`, mapping algebra coordinates to tangent vectors at `ξ°`.
    fn dphi_origin(&self) -> DMatrix<T>;

    /// A right inverse of [`dphi_origin`](Self::dphi_origin).
    fn dphi_origin_pinv(&self, w: &DVector<T>) -> DVector<T>;

    /// State matrix `A` of the linearized error dynamics at origin input `u°`.
    fn state_matrix(&self, u_origin: &Self::Input) -> Result<DMatrix<T>> {
        state_matrix_factored(self, u_origin, T::lit(FD_STEP))
    }

    /// Output matrix `C` at reference `X̂`.
    fn output_matrix(&self, xhat: &Self::Group) -> Result<DMatrix<T>> {
        output_matrix_numeric(self, xhat, T::lit(FD_STEP))
    }
}

/// `e = φ(X̂⁻¹, ξ)`.
pub fn equivariant_error<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    xhat: &S::Group,
    xi: &S::State,
) -> S::State {
    system.act_state(&xhat.inverse(), xi)
}

/// `u° = ψ(X̂⁻¹, u)`.
pub fn origin_input<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    xhat: &S::Group,
    u: &S::Input,
) -> S::Input {
    system.act_input(&xhat.inverse(), u)
}

/// One step of the equivariant error:
/// `e₊ = φ(Λ(e, u°) Λ(ξ°, u°)⁻¹ exp(−Δ), e)`.
pub fn error_dynamics_step<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    e: &S::State,
    u_origin: &S::Input,
    delta: &DVector<T>,
) -> Result<S::State> {
    let drift = system
        .lift(e, u_origin)?
        .compose(&system.lift(system.origin(), u_origin)?.inverse());
    let g = drift.compose(&S::Group::exp_coords(&(-delta)));
    Ok(system.act_state(&g, e))
}

fn chart_differential_inverse<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
) -> Result<DMatrix<T>> {
    system
        .chart_differential()
        .try_inverse()
        .ok_or(Error::Singular("chart differential"))
}

/// `A = I + DΘ · Dφ_{ξ°}(id) · D(Λ(·, u°) Λ(ξ°, u°)⁻¹) · DΘ⁻¹`.
///
/// The differential of the right-translated lift is taken numerically in
/// algebra coordinates; the remaining factors come from the system. The
/// identity term is the derivative of `φ(·, e)` in its second argument.
pub fn state_matrix_factored<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    u_origin: &S::Input,
    step: T,
) -> Result<DMatrix<T>> {
    let m = system.state_dim();
    let lift_origin_inv = system.lift(system.origin(), u_origin)?.inverse();
    let lift_diff = central_difference(
        |eps: &DVector<T>| {
            let xi = system.chart(eps)?;
            system.lift(&xi, u_origin)?.compose(&lift_origin_inv).log_coords()
        },
        &DVector::zeros(m),
        step,
    )?;
    let dtheta = chart_differential_inverse(system)?;
    Ok(DMatrix::identity(m, m) + dtheta * system.dphi_origin() * lift_diff)
}

/// Central differences of `ε ↦ Θ(error_dynamics_step(Θ⁻¹(ε), u°, 0))` at zero.
pub fn state_matrix_numeric<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    u_origin: &S::Input,
    step: T,
) -> Result<DMatrix<T>> {
    let zero_delta = DVector::zeros(S::Group::DIM);
    central_difference(
        |eps: &DVector<T>| {
            let e = system.chart(eps)?;
            let next = error_dynamics_step(system, &e, u_origin, &zero_delta)?;
            system.chart_inv(&next)
        },
        &DVector::zeros(system.state_dim()),
        step,
    )
}

/// Central differences of `ε ↦ h(φ_X̂(Θ⁻¹(ε)))` at zero.
pub fn output_matrix_numeric<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    xhat: &S::Group,
    step: T,
) -> Result<DMatrix<T>> {
    central_difference(
        |eps: &DVector<T>| system.output(&system.act_state(xhat, &system.chart(eps)?)),
        &DVector::zeros(system.state_dim()),
        step,
    )
}

/// Correction `Δ = Dφ_{ξ°}(id)† DΘ⁻¹ μ` on the Lie algebra.
pub fn reset_correction<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    mean: &DVector<T>,
) -> DVector<T> {
    system.dphi_origin_pinv(&(system.chart_differential() * mean))
}

/// `DΘ · Dφ_{ξ°}(id) · Ad_{exp(w)} · Dφ_{ξ°}(id)† · DΘ⁻¹`: the adjoint of
/// `exp(w)` carried into chart coordinates.
pub fn chart_adjoint<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    w: &DVector<T>,
) -> Result<DMatrix<T>> {
    let m = system.state_dim();
    let ad = S::Group::exp_coords(w).adjoint_matrix();
    let chart_diff = system.chart_differential();
    let lift_cols: Vec<DVector<T>> = (0..m)
        .map(|j| system.dphi_origin_pinv(&chart_diff.column(j).into_owned()))
        .collect();
    let embed = DMatrix::from_columns(&lift_cols);
    let dtheta = chart_differential_inverse(system)?;
    Ok(dtheta * system.dphi_origin() * ad * embed)
}

/// Covariance transport along `exp(tΔ)` for the (0)-connection, in the
/// trivialization the local error uses: [`chart_adjoint`] at `Δ/2`.
///
/// The reset moves the error by `e ↦ φ(exp(−Δ), e)`, i.e. the group error
/// `E = X X̂⁻¹` is right-multiplied by `exp(−Δ)`, so perturbations are
/// right-trivialized. The exact change of chart coordinates at the mean has
/// Jacobian `DΘ · Dφ · J_l(Δ) · Dφ† · DΘ⁻¹` with the left Jacobian
/// `J_l(Δ) = I + ad_Δ/2 + O(Δ²)`, which this matches to second order.
/// For a group acting on itself with the logarithm as chart it is exactly
/// `Ad_{exp(Δ/2)}`.
pub fn transport_matrix<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    delta: &DVector<T>,
) -> Result<DMatrix<T>> {
    chart_adjoint(system, &(delta * T::lit(0.5)))
}

/// The same transport written with left-trivialized tangent vectors,
/// [`chart_adjoint`] at `−Δ/2`. Applied to the right-trivialized error it
/// agrees with the exact change of coordinates only to zeroth order.
pub fn left_transport_matrix<T: Real, S: EquivariantSystem<T> + ?Sized>(
    system: &S,
    delta: &DVector<T>,
) -> Result<DMatrix<T>> {
    chart_adjoint(system, &(delta * T::lit(-0.5)))
}
