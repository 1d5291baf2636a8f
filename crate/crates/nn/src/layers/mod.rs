mod activation;
mod attention;
mod dense;
mod dropout;
mod embedding;
mod mlp;
mod norm;

pub use activation::{sigmoid_scalar, Relu, Sigmoid};
pub use attention::MultiHeadAttention;
pub use dense::Dense;
pub use dropout::Dropout;
pub use embedding::Embedding;
pub use mlp::MlpBlock;
pub use norm::LayerNorm;
