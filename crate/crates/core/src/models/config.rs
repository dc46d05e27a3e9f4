use serde::{Deserialize, Serialize};

use crate::data::N_FEATURES;
use crate::error::{Error, Result};
use crate::tensor::{Activation, AdamConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaeConfig {
    pub input_dim: usize,
    pub latent_dim: usize,
    pub l1_lambda: f64,
    pub encoder_activation: Activation,
    pub decoder_activation: Activation,
}

impl SaeConfig {
    pub fn new(latent_dim: usize) -> Self {
        SaeConfig {
            input_dim: N_FEATURES,
            latent_dim,
            l1_lambda: 1e-4,
            encoder_activation: Activation::Sigmoid,
            decoder_activation: Activation::Sigmoid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::Config("SAE input_dim must be positive".into()));
        }
        if self.latent_dim <= self.input_dim {
            return Err(Error::Config(format!(
                "sparse autoencoder must be overcomplete: latent_dim {} <= input_dim {}",
                self.latent_dim, self.input_dim
            )));
        }
        if !(self.l1_lambda >= 0.0 && self.l1_lambda.is_finite()) {
            return Err(Error::Config(format!(
                "l1_lambda must be finite and >= 0, got {}",
                self.l1_lambda
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Mlp,
    Cnn,
}

impl ClassifierKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mlp" => Ok(ClassifierKind::Mlp),
            "cnn" => Ok(ClassifierKind::Cnn),
            other => Err(Error::Config(format!("unknown classifier kind `{other}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::Cnn => "cnn",
        }
    }
}

/// Classification head attached to the latent space.
///
/// For the CNN head, `cnn_grid` and `cnn_kernel` may be left unset: the grid
/// then defaults to the most square factor pair of the latent size
/// (rows <= cols) and each kernel axis to 3, or 2 when 3 would leave a
/// convolution output that the pooling window does not divide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub mlp_hidden: Vec<usize>,
    pub cnn_grid: Option<(usize, usize)>,
    pub cnn_filters: usize,
    pub cnn_kernel: Option<(usize, usize)>,
    pub pool: (usize, usize),
    pub head_hidden: Vec<usize>,
}

impl ClassifierConfig {
    pub fn mlp() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::Mlp,
            mlp_hidden: vec![64, 32],
            cnn_grid: None,
            cnn_filters: 16,
            cnn_kernel: None,
            pool: (2, 2),
            head_hidden: vec![64],
        }
    }

    pub fn cnn() -> Self {
        ClassifierConfig {
            kind: ClassifierKind::Cnn,
            ..Self::mlp()
        }
    }

    pub fn for_kind(kind: ClassifierKind) -> Self {
        match kind {
            ClassifierKind::Mlp => Self::mlp(),
            ClassifierKind::Cnn => Self::cnn(),
        }
    }

    pub fn cnn_geometry(&self, latent_dim: usize) -> Result<CnnGeometry> {
        let grid = match self.cnn_grid {
            Some(g) => g,
            None => square_grid(latent_dim)?,
        };
        if grid.0 * grid.1 != latent_dim {
            return Err(Error::Config(format!(
                "cnn grid {}x{} does not hold latent_dim {latent_dim}",
                grid.0, grid.1
            )));
        }
        if self.cnn_filters == 0 {
            return Err(Error::Config("cnn_filters must be positive".into()));
        }
        let pool = self.pool;
        if pool.0 == 0 || pool.1 == 0 {
            return Err(Error::Config("pool window must be positive".into()));
        }
        let kernel = match self.cnn_kernel {
            Some(k) => k,
            None => (auto_kernel(grid.0, pool.0), auto_kernel(grid.1, pool.1)),
        };
        if kernel.0 == 0 || kernel.1 == 0 || kernel.0 > grid.0 || kernel.1 > grid.1 {
            return Err(Error::Config(format!(
                "cnn kernel {}x{} does not fit grid {}x{}",
                kernel.0, kernel.1, grid.0, grid.1
            )));
        }
        let conv = (grid.0 - kernel.0 + 1, grid.1 - kernel.1 + 1);
        if conv.0 % pool.0 != 0 || conv.1 % pool.1 != 0 {
            return Err(Error::Config(format!(
                "pool window {}x{} does not divide convolution output {}x{}",
                pool.0, pool.1, conv.0, conv.1
            )));
        }
        let pooled = (conv.0 / pool.0, conv.1 / pool.1);
        if pooled.0 < 1 || pooled.1 < 1 {
            return Err(Error::Config(format!(
                "pooled feature map {}x{} is empty",
                pooled.0, pooled.1
            )));
        }
        Ok(CnnGeometry {
            grid,
            kernel,
            pool,
            conv,
            pooled,
            filters: self.cnn_filters,
        })
    }
}

/// Resolved CNN shapes for one latent size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnnGeometry {
    pub grid: (usize, usize),
    pub kernel: (usize, usize),
    pub pool: (usize, usize),
    pub conv: (usize, usize),
    pub pooled: (usize, usize),
    pub filters: usize,
}

impl CnnGeometry {
    pub fn flat_features(&self) -> usize {
        self.filters * self.pooled.0 * self.pooled.1
    }
}

/// Factor pair `rows <= cols` of `n` minimising `cols - rows`.
pub fn square_grid(n: usize) -> Result<(usize, usize)> {
    if n == 0 {
        return Err(Error::Config("latent_dim must be positive".into()));
    }
    let mut rows = (n as f64).sqrt() as usize;
    while rows * rows > n {
        rows -= 1;
    }
    while (rows + 1) * (rows + 1) <= n {
        rows += 1;
    }
    while n % rows != 0 {
        rows -= 1;
    }
    Ok((rows, n / rows))
}

fn auto_kernel(extent: usize, pool: usize) -> usize {
    for k in [3, 2] {
        if k <= extent && (extent - k + 1) % pool == 0 && extent - k + 1 >= pool {
            return k;
        }
    }
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultitaskConfig {
    pub sae: SaeConfig,
    pub classifier: ClassifierConfig,
    /// Weight of the classification loss; reconstruction gets `1 - alpha`.
    pub loss_mix_alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl MultitaskConfig {
    pub fn new(kind: ClassifierKind, latent_dim: usize) -> Self {
        MultitaskConfig {
            sae: SaeConfig::new(latent_dim),
            classifier: ClassifierConfig::for_kind(kind),
            loss_mix_alpha: 0.5,
            epochs: 150,
            batch_size: 32,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sae.validate()?;
        self.adam.validate()?;
        if !(0.0..=1.0).contains(&self.loss_mix_alpha) {
            return Err(Error::Config(format!(
                "loss_mix_alpha must lie in [0, 1], got {}",
                self.loss_mix_alpha
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be >= 1".into()));
        }
        match self.classifier.kind {
            ClassifierKind::Mlp => {
                if self.classifier.mlp_hidden.contains(&0) {
                    return Err(Error::Config("mlp hidden sizes must be positive".into()));
                }
            }
            ClassifierKind::Cnn => {
                self.classifier.cnn_geometry(self.sae.latent_dim)?;
                if self.classifier.head_hidden.contains(&0) {
                    return Err(Error::Config("cnn head sizes must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_grid_examples() {
        assert_eq!(square_grid(200).unwrap(), (10, 20));
        assert_eq!(square_grid(100).unwrap(), (10, 10));
        assert_eq!(square_grid(300).unwrap(), (15, 20));
        assert_eq!(square_grid(50).unwrap(), (5, 10));
        assert_eq!(square_grid(13).unwrap(), (1, 13));
    }

    #[test]
    fn default_geometry_for_200() {
        let g = ClassifierConfig::cnn().cnn_geometry(200).unwrap();
        assert_eq!(g.grid, (10, 20));
        assert_eq!(g.kernel, (3, 3));
        assert_eq!(g.conv, (8, 18));
        assert_eq!(g.pooled, (4, 9));
        assert_eq!(g.flat_features(), 16 * 36);
    }

    #[test]
    fn sweep_sizes_all_resolve() {
        for latent in [50, 100, 150, 200, 250, 300] {
            let g = ClassifierConfig::cnn().cnn_geometry(latent).unwrap();
            assert_eq!(g.grid.0 * g.grid.1, latent);
            assert_eq!(g.conv.0 % 2, 0);
            assert_eq!(g.conv.1 % 2, 0);
        }
    }

    #[test]
    fn explicit_grid_must_match_latent() {
        let mut c = MultitaskConfig::new(ClassifierKind::Cnn, 100);
        c.classifier.cnn_grid = Some((10, 20));
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.sae.latent_dim = 200;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn explicit_kernel_must_divide_pool() {
        let mut c = ClassifierConfig::cnn();
        c.cnn_grid = Some((5, 10));
        c.cnn_kernel = Some((3, 3));
        assert!(c.cnn_geometry(50).is_err());
    }

    #[test]
    fn sae_must_be_overcomplete() {
        assert!(SaeConfig::new(24).validate().is_err());
        assert!(SaeConfig::new(25).validate().is_ok());
    }

    #[test]
    fn alpha_and_epochs_validated() {
        let mut c = MultitaskConfig::new(ClassifierKind::Mlp, 100);
        c.loss_mix_alpha = 1.5;
        assert!(c.validate().is_err());
        c.loss_mix_alpha = 1.0;
        c.epochs = 0;
        assert!(c.validate().is_err());
    }
}
