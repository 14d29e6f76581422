pub mod algebra;
pub mod banach;
pub mod check;
pub mod framing;
pub mod generate;
pub mod hilbert;
pub mod imprimitivity;
pub mod linalg;
pub mod ovm;
pub mod pipeline;
pub mod report;
pub mod scenario;
