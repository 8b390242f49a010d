use std::fmt;
use std::sync::Arc;

use crate::scalar::Real;

/// `x ↦ out`, both of the state dimension (or `n×n` row-major for a full
/// diffusion matrix).
pub type StateMap<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;
/// `(x, Δt, y) ↦ F(x, Δt, y)` written into `out`.
pub type UpdateMap<T> = Arc<dyn Fn(&[T], T, &[T], &mut [T]) + Send + Sync>;

#[derive(Clone)]
pub enum Diffusion<T> {
    /// Row-major `n×n` matrix `σ(x)`.
    Full(StateMap<T>),
    /// Diagonal of `σ(x)`.
    Diagonal(StateMap<T>),
}

#[derive(Clone)]
pub enum FieldKind<T> {
    General { noise_dim: usize, update: UpdateMap<T> },
    EulerMaruyama { sigma: Diffusion<T>, mu: StateMap<T> },
}

/// The update map `F` of `X_{k+1} = X_k + F(X_k, Δt, y)`.
#[derive(Clone)]
pub struct SchemeField<T> {
    dimension: usize,
    kind: FieldKind<T>,
}

impl<T> fmt::Debug for SchemeField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            FieldKind::General { noise_dim, .. } => format!("General(noise_dim={noise_dim})"),
            FieldKind::EulerMaruyama { sigma: Diffusion::Full(_), .. } => "EulerMaruyama(full)".into(),
            FieldKind::EulerMaruyama { sigma: Diffusion::Diagonal(_), .. } => "EulerMaruyama(diagonal)".into(),
        };
        f.debug_struct("SchemeField").field("dimension", &self.dimension).field("kind", &kind).finish()
    }
}

impl<T: Real> SchemeField<T> {
    pub fn general(
        dimension: usize,
        noise_dim: usize,
        update: impl Fn(&[T], T, &[T], &mut [T]) + Send + Sync + 'static,
    ) -> Self {
        SchemeField { dimension, kind: FieldKind::General { noise_dim, update: Arc::new(update) } }
    }

    /// `F(x, Δt, y) = σ(x) y √Δt + μ(x) Δt` with a full diffusion matrix.
    pub fn euler_maruyama(
        dimension: usize,
        sigma: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
        mu: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
    ) -> Self {
        SchemeField {
            dimension,
            kind: FieldKind::EulerMaruyama { sigma: Diffusion::Full(Arc::new(sigma)), mu: Arc::new(mu) },
        }
    }

    /// Euler–Maruyama with diagonal `σ(x)`.
    pub fn euler_maruyama_diagonal(
        dimension: usize,
        sigma: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
        mu: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
    ) -> Self {
        SchemeField {
            dimension,
            kind: FieldKind::EulerMaruyama { sigma: Diffusion::Diagonal(Arc::new(sigma)), mu: Arc::new(mu) },
        }
    }

    /// Constant scalar coefficients on every coordinate: `σ = s·I`, `μ = m`.
    pub fn constant(dimension: usize, sigma: T, mu: T) -> Self {
        Self::euler_maruyama_diagonal(
            dimension,
            move |_, out| out.iter_mut().for_each(|o| *o = sigma),
            move |_, out| out.iter_mut().for_each(|o| *o = mu),
        )
    }

    /// `F(x, Δt, y) = y`: the state is the random walk itself.
    pub fn walk(dimension: usize) -> Self {
        Self::general(dimension, dimension, |_, _, y, out| out.copy_from_slice(y))
    }

    /// `F ≡ 0`.
    pub fn frozen(dimension: usize, noise_dim: usize) -> Self {
        Self::general(dimension, noise_dim, |_, _, _, out| out.iter_mut().for_each(|o| *o = T::zero()))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Length of the innovation vector `y`.
    pub fn noise_dim(&self) -> usize {
        match &self.kind {
            FieldKind::General { noise_dim, .. } => *noise_dim,
            FieldKind::EulerMaruyama { .. } => self.dimension,
        }
    }

    pub fn kind(&self) -> &FieldKind<T> {
        &self.kind
    }

    pub fn is_euler_maruyama(&self) -> bool {
        matches!(self.kind, FieldKind::EulerMaruyama { .. })
    }

    /// `σ(x)` as a row-major `n×n` matrix, for Euler–Maruyama fields.
    pub fn sigma_matrix(&self, x: &[T]) -> Option<Vec<T>> {
        let n = self.dimension;
        match &self.kind {
            FieldKind::EulerMaruyama { sigma: Diffusion::Full(s), .. } => {
                let mut out = vec![T::zero(); n * n];
                s(x, &mut out);
                Some(out)
            }
            FieldKind::EulerMaruyama { sigma: Diffusion::Diagonal(s), .. } => {
                let mut diag = vec![T::zero(); n];
                s(x, &mut diag);
                let mut out = vec![T::zero(); n * n];
                for (i, d) in diag.into_iter().enumerate() {
                    out[i * n + i] = d;
                }
                Some(out)
            }
            FieldKind::General { .. } => None,
        }
    }

    pub fn drift(&self, x: &[T]) -> Option<Vec<T>> {
        match &self.kind {
            FieldKind::EulerMaruyama { mu, .. } => {
                let mut out = vec![T::zero(); self.dimension];
                mu(x, &mut out);
                Some(out)
            }
            FieldKind::General { .. } => None,
        }
    }

    /// Writes `F(x, Δt, y)` into `out`. `scratch` must hold `n·n` values for
    /// full diffusions (`n` suffices otherwise).
    pub fn increment_into(&self, x: &[T], dt: T, y: &[T], out: &mut [T], scratch: &mut Vec<T>) {
        let n = self.dimension;
        match &self.kind {
            FieldKind::General { update, .. } => update(x, dt, y, out),
            FieldKind::EulerMaruyama { sigma, mu } => {
                let sq = dt.sqrt();
                mu(x, out);
                for o in out.iter_mut() {
                    *o = *o * dt;
                }
                match sigma {
                    Diffusion::Diagonal(s) => {
                        scratch.resize(n, T::zero());
                        s(x, &mut scratch[..n]);
                        for i in 0..n {
                            out[i] = out[i] + scratch[i] * y[i] * sq;
                        }
                    }
                    Diffusion::Full(s) => {
                        scratch.resize(n * n, T::zero());
                        s(x, &mut scratch[..n * n]);
                        for i in 0..n {
                            let row = &scratch[i * n..(i + 1) * n];
                            let dot: T = row.iter().zip(y).map(|(&a, &b)| a * b).sum();
                            out[i] = out[i] + dot * sq;
                        }
                    }
                }
            }
        }
    }

    pub fn increment(&self, x: &[T], dt: T, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.dimension];
        let mut scratch = Vec::new();
        self.increment_into(x, dt, y, &mut out, &mut scratch);
        out
    }

    /// `x + F(x, Δt, y)`.
    pub fn step(&self, x: &[T], dt: T, y: &[T]) -> Vec<T> {
        let mut out = self.increment(x, dt, y);
        for (o, &xi) in out.iter_mut().zip(x) {
            *o = xi + *o;
        }
        out
    }
}
