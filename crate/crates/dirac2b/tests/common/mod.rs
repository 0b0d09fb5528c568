#![allow(dead_code)]

pub mod sphere;
