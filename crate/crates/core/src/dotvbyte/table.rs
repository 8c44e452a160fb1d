/// For each control byte, the byte shuffle that expands a group's packed
/// gaps into eight little-endian u16 lanes. Bit `j` of the control selects a
/// 2-byte gap for lane `j`; 0x80 zeroes the lane's high byte.
pub(crate) const SHUFFLE: [[u8; 16]; 256] = {
    let mut t = [[0x80u8; 16]; 256];
    let mut c = 0;
    while c < 256 {
        let mut src = 0u8;
        let mut lane = 0;
        while lane < 8 {
            t[c][2 * lane] = src;
            src += 1;
            if (c >> lane) & 1 == 1 {
                t[c][2 * lane + 1] = src;
                src += 1;
            }
            lane += 1;
        }
        c += 1;
    }
    t
};

/// Data bytes consumed by one group: eight plus one per set control bit.
#[inline(always)]
pub(crate) fn group_len(control: u8) -> usize {
    8 + control.count_ones() as usize
}
