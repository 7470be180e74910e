pub mod exactalg;
pub mod harness;
pub mod infinity;
pub mod oracle;
pub mod qpolys;
pub mod quad;
pub mod zero;
