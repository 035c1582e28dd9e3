use crate::{Error, Result};

/// Names accepted by [`ButcherTableau::by_name`].
pub const SCHEME_NAMES: &[&str] = &["rk1", "rk2", "rk4", "grk2", "lobattoIIIA3", "bs3", "dop5"];

/// Coefficients `(A, b, c)` of an `s`-stage Runge–Kutta method, with the
/// optional lower-order weights `b*` of an embedded pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub name: String,
    /// Row-major `s × s`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub b_star: Option<Vec<f64>>,
    pub order: usize,
    pub order_star: Option<usize>,
}

impl ButcherTableau {
    pub fn new(
        name: impl Into<String>,
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: Vec<f64>,
        order: usize,
    ) -> Result<Self> {
        let s = b.len();
        if s == 0 || c.len() != s || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::InvalidParameter(format!(
                "tableau dimensions disagree (s = {s})"
            )));
        }
        if order == 0 {
            return Err(Error::InvalidParameter("tableau order must be positive".into()));
        }
        Ok(Self {
            name: name.into(),
            a,
            b,
            c,
            b_star: None,
            order,
            order_star: None,
        })
    }

    pub fn with_embedded(mut self, b_star: Vec<f64>, order_star: usize) -> Result<Self> {
        if b_star.len() != self.stages() {
            return Err(Error::InvalidParameter("b* length differs from stage count".into()));
        }
        self.b_star = Some(b_star);
        self.order_star = Some(order_star);
        Ok(self)
    }

    /// Builds one of the library tableaux. `alpha` only applies to `rk2`
    /// and defaults to the midpoint rule (`α = 1/2`).
    pub fn by_name(name: &str, alpha: Option<f64>) -> Result<Self> {
        match name {
            "rk1" => Ok(Self::forward_euler()),
            "rk2" => Self::rk2(alpha.unwrap_or(0.5)),
            "rk4" => Ok(Self::rk4()),
            "grk2" => Ok(Self::gauss2()),
            "lobattoIIIA3" | "lobatto3a" | "lobatto" => Ok(Self::lobatto_iiia3()),
            "bs3" => Ok(Self::bogacki_shampine()),
            "dop5" => Ok(Self::dormand_prince()),
            other => Err(Error::UnknownScheme(other.to_string())),
        }
    }

    pub fn forward_euler() -> Self {
        Self::new("rk1", vec![vec![0.0]], vec![1.0], vec![0.0], 1).unwrap()
    }

    pub fn rk2(alpha: f64) -> Result<Self> {
        if alpha == 0.0 || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rk2 needs a finite nonzero alpha, got {alpha}"
            )));
        }
        let w = 1.0 / (2.0 * alpha);
        Self::new(
            "rk2",
            vec![vec![0.0, 0.0], vec![alpha, 0.0]],
            vec![1.0 - w, w],
            vec![0.0, alpha],
            2,
        )
    }

    pub fn rk4() -> Self {
        Self::new(
            "rk4",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
            4,
        )
        .unwrap()
    }

    /// Two-stage Gauss–Legendre collocation (order 4, A-stable).
    pub fn gauss2() -> Self {
        let r = 3f64.sqrt() / 6.0;
        Self::new(
            "grk2",
            vec![vec![0.25, 0.25 - r], vec![0.25 + r, 0.25]],
            vec![0.5, 0.5],
            vec![0.5 - r, 0.5 + r],
            4,
        )
        .unwrap()
    }

    /// Three-stage Lobatto IIIA (order 4).
    pub fn lobatto_iiia3() -> Self {
        Self::new(
            "lobattoIIIA3",
            vec![
                vec![0.0, 0.0, 0.0],
                vec![5.0 / 24.0, 1.0 / 3.0, -1.0 / 24.0],
                vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            ],
            vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 1.0],
            4,
        )
        .unwrap()
    }

    /// Bogacki–Shampine 3(2).
    pub fn bogacki_shampine() -> Self {
        Self::new(
            "bs3",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.75, 0.0, 0.0],
                vec![2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0],
            ],
            vec![2.0 / 9.0, 1.0 / 3.0, 4.0 / 9.0, 0.0],
            vec![0.0, 0.5, 0.75, 1.0],
            3,
        )
        .and_then(|t| t.with_embedded(vec![7.0 / 24.0, 0.25, 1.0 / 3.0, 0.125], 2))
        .unwrap()
    }

    /// Dormand–Prince 5(4).
    pub fn dormand_prince() -> Self {
        let a = vec![
            vec![0.0; 7],
            vec![1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            vec![44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0, 0.0],
            vec![
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
                0.0,
                0.0,
                0.0,
            ],
            vec![
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
                0.0,
                0.0,
            ],
            vec![
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
                0.0,
            ],
        ];
        let b = vec![
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
            0.0,
        ];
        let b_star = vec![
            5179.0 / 57600.0,
            0.0,
            7571.0 / 16695.0,
            393.0 / 640.0,
            -92097.0 / 339200.0,
            187.0 / 2100.0,
            1.0 / 40.0,
        ];
        let c = vec![0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
        Self::new("dop5", a, b, c, 5)
            .and_then(|t| t.with_embedded(b_star, 4))
            .unwrap()
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// True when `A` is strictly lower triangular.
    pub fn is_explicit(&self) -> bool {
        self.a
            .iter()
            .enumerate()
            .all(|(i, row)| row[i..].iter().all(|&x| x == 0.0))
    }

    pub fn has_embedded(&self) -> bool {
        self.b_star.is_some()
    }

    /// Largest deviation of `c_i` from the row sums of `A`.
    pub fn row_sum_defect(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.c)
            .map(|(row, c)| (row.iter().sum::<f64>() - c).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<ButcherTableau> {
        SCHEME_NAMES
            .iter()
            .map(|n| ButcherTableau::by_name(n, None).unwrap())
            .collect()
    }

    #[test]
    fn consistency_conditions() {
        for tab in all() {
            assert!(tab.row_sum_defect() <= 1e-14, "{}", tab.name);
            assert!((tab.b.iter().sum::<f64>() - 1.0).abs() <= 1e-14, "{}", tab.name);
            if let Some(bs) = &tab.b_star {
                assert!((bs.iter().sum::<f64>() - 1.0).abs() <= 1e-14, "{}", tab.name);
            }
        }
    }

    #[test]
    fn explicit_flags() {
        let explicit: Vec<_> = all()
            .into_iter()
            .filter(|t| t.is_explicit())
            .map(|t| t.name)
            .collect();
        assert_eq!(explicit, ["rk1", "rk2", "rk4", "bs3", "dop5"]);
    }

    #[test]
    fn orders() {
        let orders: Vec<_> = all().iter().map(|t| (t.order, t.order_star)).collect();
        assert_eq!(
            orders,
            [
                (1, None),
                (2, None),
                (4, None),
                (4, None),
                (4, None),
                (3, Some(2)),
                (5, Some(4))
            ]
        );
    }

    #[test]
    fn midpoint_rule() {
        let t = ButcherTableau::by_name("rk2", Some(0.5)).unwrap();
        assert_eq!(t.b, vec![0.0, 1.0]);
        assert_eq!(t.c, vec![0.0, 0.5]);
    }

    #[test]
    fn gauss_upper_entry() {
        let t = ButcherTableau::gauss2();
        assert_eq!(t.b, vec![0.5, 0.5]);
        assert!((t.a[0][1] - (0.25 - 3f64.sqrt() / 6.0)).abs() < 1e-16);
    }

    #[test]
    fn euler_shape() {
        let t = ButcherTableau::by_name("rk1", None).unwrap();
        assert_eq!((t.stages(), t.order), (1, 1));
        assert_eq!((t.a.clone(), t.b.clone(), t.c.clone()), (vec![vec![0.0]], vec![1.0], vec![0.0]));
    }

    #[test]
    fn rejects_bad_names_and_alpha() {
        assert_eq!(
            ButcherTableau::by_name("rk7", None),
            Err(Error::UnknownScheme("rk7".into()))
        );
        assert!(matches!(
            ButcherTableau::by_name("rk2", Some(0.0)),
            Err(Error::InvalidParameter(_))
        ));
    }
}
