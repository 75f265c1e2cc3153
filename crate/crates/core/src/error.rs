use crate::pipeline::Stage;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("numeric instability during diffusion (non-finite intermediate, check time_step)")]
    NumericInstability,

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("score undefined: ground truth contains no edge pixels")]
    UndefinedScore,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown stage id: {0}")]
    UnknownStage(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },

    #[error("image i/o: {0}")]
    Image(#[from] image::ImageError),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach the pipeline stage that produced this error.
    pub fn at_stage(self, stage: Stage) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
