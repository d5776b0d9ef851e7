//! Dense arrays, masks and the pixel-level primitives shared by every other
//! module.

mod io;
mod mask;
mod morphology;
mod resize;
mod rng;
mod tensor;
mod translate;

pub use io::{
    quantize, read_class_png, read_image_png, read_mask_png, write_class_png, write_image_png,
    write_mask_png,
};
pub use mask::{BinaryMask, ClassMask};
pub use morphology::{dilate, erode};
pub use resize::{resize_nearest_class, resize_nearest_mask, upsample_bilinear};
pub use rng::SeededRng;
pub use tensor::{elementwise_mul, ImageTensor, MulOperand};
pub use translate::{sample_translation, translate_zero_fill, Translate, TranslationVector};

pub(crate) use translate::validate_lambda;
