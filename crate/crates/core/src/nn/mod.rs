//! Self-contained neural-network core: dense tensors, GRU cells with
//! analytic backward passes, stacked bidirectional layers, the linear output
//! head, the MSE objective, Adam, and a finite-difference gradient checker.
//!
//! Forward passes are deterministic: identical parameters and inputs give
//! bitwise-identical outputs, with summation orders fixed in `mat`.

pub mod adam;
pub mod gradcheck;
pub mod gru;
pub mod mat;
pub mod model;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use gradcheck::grad_check;
pub use gru::{gru_cell_backward, gru_cell_forward, GruCellCache, GruDirParams};
pub use mat::Mat;
pub use model::{
    bgru_backward, bgru_forward, bgru_infer, head_output_to_complex, linear_head, linear_head_backward,
    model_loss, model_loss_and_grads, mse_loss_and_grad, BgruCache, BiGruLayerParams, HeadParams, ModelParams,
    HEAD_OUTPUT, MODEL_VERSION,
};
