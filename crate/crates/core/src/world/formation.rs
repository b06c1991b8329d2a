//! Team formation: home positions as a function of the ball.
//!
//! All positions are in the team's attack frame (own goal at -x).

use crate::geom::Vec2;

/// Per role: kickoff x, y, and the home x when the ball is on the own and on
/// the opponent goal line. Home x interpolates linearly in between.
const ROLES: [(f64, f64, f64, f64); 11] = [
    (-50.0, 0.0, -50.0, -50.0),
    (-30.0, -6.0, -48.0, -6.0),
    (-30.0, 6.0, -48.0, -6.0),
    (-27.0, -20.0, -46.0, 0.0),
    (-27.0, 20.0, -46.0, 0.0),
    (-17.0, 0.0, -42.0, 12.0),
    (-8.0, -12.0, -38.0, 26.0),
    (-8.0, 12.0, -38.0, 26.0),
    (-1.0, -22.0, -26.0, 42.0),
    (-1.0, 22.0, -26.0, 42.0),
    (-1.0, 0.0, -22.0, 44.0),
];

pub const GOALIE: u8 = 1;
pub const KICKOFF_TAKER: u8 = 11;

pub fn home_position(unum: u8, ball: Vec2) -> Vec2 {
    if unum == GOALIE {
        return Vec2::new(-50.0, (ball.y * 0.12).clamp(-4.0, 4.0));
    }
    let (_, y, own, opp) = ROLES[usize::from(unum - 1)];
    let t = ((ball.x + 52.5) / 105.0).clamp(0.0, 1.0);
    Vec2::new(own + (opp - own) * t, (y + ball.y * 0.3).clamp(-31.0, 31.0))
}

/// Kickoff placement. `jitter` is added to every outfield player except the
/// kicker and the result is pushed back into the own half.
pub fn kickoff_position(unum: u8, kicking: bool, jitter: Vec2) -> Vec2 {
    if unum == GOALIE {
        return Vec2::new(-50.0, 0.0);
    }
    if kicking && unum == KICKOFF_TAKER {
        return Vec2::new(-0.6, 0.0);
    }
    let (bx, by, _, _) = ROLES[usize::from(unum - 1)];
    let max_x = if kicking { -1.0 } else { -9.5 };
    Vec2::new((bx + jitter.x).min(max_x), (by + jitter.y).clamp(-31.0, 31.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_kicking_team_stays_outside_center_circle() {
        for unum in 1..=11 {
            let p = kickoff_position(unum, false, Vec2::new(1.0, -1.0));
            assert!(p.length() > 9.15, "unum {unum} at {p:?}");
            assert!(p.x < 0.0);
        }
    }

    #[test]
    fn kicker_starts_on_the_ball() {
        assert!(kickoff_position(KICKOFF_TAKER, true, Vec2::ZERO).length() < 1.085);
    }
}
