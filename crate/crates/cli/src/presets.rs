//! Named configurations for the standard experiments.

use crate::config::Command;

#[derive(Debug, Clone, Copy)]
pub struct Preset {
    pub name: &'static str,
    pub command: Command,
    pub about: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "bernoulli-linear",
        command: Command::Decompose,
        about: "f(x) = x on a Bernoulli walk: one martingale term, no corrections",
        text: "driver=bernoulli\nfield=walk\npayoff=linear\nx0=0\nsteps=1\nhorizon=1\n",
    },
    Preset {
        name: "trinomial-solve",
        command: Command::Solve,
        about: "three trinomial Euler steps of a geometric Brownian motion, smooth call",
        text: "driver=trinomial\nfield=em-gbm\nsigma=0.2\nmu=0.05\nx0=1\nsteps=3\npayoff=smooth-call\nstrike=1\nwidth=0.2\n",
    },
    Preset {
        name: "gbm-paths",
        command: Command::Simulate,
        about: "four Bernoulli Euler paths of a geometric Brownian motion",
        text: "driver=bernoulli\nfield=em-gbm\nsigma=0.2\nmu=0.05\nx0=1\nsteps=16\npaths=4\nseed=7\n",
    },
    Preset {
        name: "walsh-100d",
        command: Command::Estimate,
        about: "100 Walsh-driven coordinates, mean-square payoff, randomized Halton",
        text: "dimension=100\ndriver=walsh-n\nfield=em-identity\nsigma=1\nmu=0\nx0=0\nsteps=16\n\
               payoff=mean-square-100d\nsamples=16384\nsampler=halton\nseed=17\n",
    },
    Preset {
        name: "moment-matched",
        command: Command::Converge,
        about: "Bernoulli Euler scheme for a geometric Brownian motion, weak order 1",
        text: "driver=bernoulli\nfield=em-gbm\nsigma=0.2\nmu=0.05\nx0=1\npayoff=smooth-call\nstrike=1\nwidth=0.2\n\
               grid=16,32,64,128\nreference=fine\nreference_steps=4096\nsamples=16384\nseed=24301\n",
    },
    Preset {
        name: "complete-market",
        command: Command::Converge,
        about: "two assets driven by the three-atom design, weak order 1/2",
        text: "dimension=2\ndriver=trinomial-3pt-120deg\nfield=em-gbm\nsigma=0.2\nmu=0\nx0=1\npayoff=cubic-sum\n\
               grid=16,32,64,128\nreference=gbm-cubic-sum\nsamples=16384\nseed=24301\n",
    },
    Preset {
        name: "complete-market-report",
        command: Command::CompleteMarket,
        about: "design moments, three-atom obstruction search and the order fit",
        text: "grid=16,32,64,128\nsearch_resolution=60\nseed=24301\n",
    },
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}
