use std::fmt;

/// A named statistical quantity appearing in symbolic expressions.
///
/// Variant order fixes the canonical monomial ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    /// Central moment `mu_j` of the first (or only) sample, `j >= 2`.
    MomentX(u8),
    /// Central moment of the second sample, `j >= 2`.
    MomentY(u8),
    /// Leading constant of the variance estimator. Its exponents are stored
    /// in halves so that `A^(-3/2)` is representable.
    A,
    /// Estimator coefficient on the first sample (plain `B` in one-sample use).
    Bx,
    By,
    /// Sample-size weight `b_x = n / n_x`.
    WeightX,
    WeightY,
    Sigma2X,
    Sigma2Y,
    /// Square root of the variance adjustment.
    R,
    /// Standardized cumulant `lambda_j`.
    Lambda(u8),
    /// Formal sampling-cumulant coefficient `k_{j,l}`.
    Cumulant(u8, u8),
}

impl Symbol {
    /// Moment symbol for sample `x`; `None` for orders below two since the
    /// data are centered.
    pub fn moment_x(j: u8) -> Option<Self> {
        (j >= 2).then_some(Symbol::MomentX(j))
    }

    pub fn moment_y(j: u8) -> Option<Self> {
        (j >= 2).then_some(Symbol::MomentY(j))
    }

    /// Whether exponents of this symbol are counted in halves.
    pub fn half_powers(self) -> bool {
        matches!(self, Symbol::A)
    }

    /// Swap the roles of the two samples.
    pub fn swap_samples(self) -> Self {
        match self {
            Symbol::MomentX(j) => Symbol::MomentY(j),
            Symbol::MomentY(j) => Symbol::MomentX(j),
            Symbol::Bx => Symbol::By,
            Symbol::By => Symbol::Bx,
            Symbol::WeightX => Symbol::WeightY,
            Symbol::WeightY => Symbol::WeightX,
            Symbol::Sigma2X => Symbol::Sigma2Y,
            Symbol::Sigma2Y => Symbol::Sigma2X,
            s => s,
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        let indexed = |prefix: &str| -> Option<u8> { name.strip_prefix(prefix)?.strip_suffix(']')?.parse().ok() };
        let sym = match name {
            "A" => Symbol::A,
            "B_x" | "B" => Symbol::Bx,
            "B_y" => Symbol::By,
            "b_x" => Symbol::WeightX,
            "b_y" => Symbol::WeightY,
            "sigma2_x" | "sigma2" => Symbol::Sigma2X,
            "sigma2_y" => Symbol::Sigma2Y,
            "r" => Symbol::R,
            _ => {
                if let Some(j) = indexed("mu_x[").or_else(|| indexed("mu[")) {
                    return Symbol::moment_x(j);
                }
                if let Some(j) = indexed("mu_y[") {
                    return Symbol::moment_y(j);
                }
                if let Some(rest) = name.strip_prefix("k[").and_then(|r| r.strip_suffix(']')) {
                    let (j, l) = rest.split_once(',')?;
                    return Some(Symbol::Cumulant(j.trim().parse().ok()?, l.trim().parse().ok()?));
                }
                let j: u8 = name.strip_prefix('l')?.parse().ok()?;
                return (j >= 1).then_some(Symbol::Lambda(j));
            }
        };
        Some(sym)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::MomentX(j) => write!(f, "mu_x[{j}]"),
            Symbol::MomentY(j) => write!(f, "mu_y[{j}]"),
            Symbol::A => f.write_str("A"),
            Symbol::Bx => f.write_str("B_x"),
            Symbol::By => f.write_str("B_y"),
            Symbol::WeightX => f.write_str("b_x"),
            Symbol::WeightY => f.write_str("b_y"),
            Symbol::Sigma2X => f.write_str("sigma2_x"),
            Symbol::Sigma2Y => f.write_str("sigma2_y"),
            Symbol::R => f.write_str("r"),
            Symbol::Lambda(j) => write!(f, "l{j}"),
            Symbol::Cumulant(j, l) => write!(f, "k[{j},{l}]"),
        }
    }
}
