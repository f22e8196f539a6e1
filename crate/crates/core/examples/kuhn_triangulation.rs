//! The n! Kuhn simplices of the unit cube and their images in a box.

use perspective_gap::geometry::{affine_image_of_cell, kuhn_triangulate, BoxDomain, KuhnCell};

fn main() -> perspective_gap::Result<()> {
    let tri = kuhn_triangulate(3)?;
    println!("[0,1]^3 splits into {} cells", tri.len());
    for cell in tri.iter() {
        println!(
            "  #{} order {:?} chain {:?} volume {:.6}",
            cell.index(),
            cell.permutation(),
            cell.chain_vertices(),
            cell.volume()
        );
    }

    let y = [0.7, 0.2, 0.5];
    let cell = KuhnCell::locate(&y);
    println!("{y:?} lies in cell {:?}", cell.permutation());

    let b = BoxDomain::new(vec![1.0, 1.0, 1.0], 2.0)?;
    let image = affine_image_of_cell(&cell, &b)?;
    println!("its image in {:?} has vertices {:?}", b, image.vertices());
    println!("volume {} = box volume / 3! = {}", image.volume(), b.volume() / 6.0);
    Ok(())
}
